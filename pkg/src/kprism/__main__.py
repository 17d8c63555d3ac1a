"""Allow ``python -m kprism`` as an alternative to the console script."""

from kprism.cli import main

if __name__ == "__main__":
    main()
