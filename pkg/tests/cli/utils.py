import contextlib
import os
from pathlib import Path
from typing import List, Optional

from click.testing import CliRunner, Result

from supercurves.cli import cli

TEST_DATA_DIR = Path(__file__).parents[1] / "files"


def run_cli(
    args: Optional[List[str]],
    exit_code: int = 0,
    temp_work_dir: bool = True,
    catch_exceptions: bool = False,
) -> Result:
    runner = CliRunner()
    arguments = [str(arg) for arg in args] if args is not None else []
    if temp_work_dir:
        with runner.isolated_filesystem():
            result = runner.invoke(cli, arguments, catch_exceptions=catch_exceptions)
    else:
        result = runner.invoke(cli, arguments, catch_exceptions=catch_exceptions)
    if result.exit_code != exit_code:
        print(result.output)
        raise AssertionError(f"supercurves exit code: {result.exit_code} does not match expected: {exit_code}")
    return result


@contextlib.contextmanager
def working_directory(path: Path):
    """Changes working directory and returns to previous on exit"""
    prev_cwd = Path.cwd()
    os.chdir(path)
    try:
        yield
    finally:
        os.chdir(prev_cwd)
