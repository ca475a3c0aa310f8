"""Main entry point for the asmlab CLI when run as python -m asmlab."""

from asmlab.cli import main_cli

if __name__ == "__main__":
    main_cli()
