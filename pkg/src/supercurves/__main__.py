from supercurves.cli import cli

cli()
