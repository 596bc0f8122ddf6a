import sys

from src import entrypoint

if __name__ == "__main__":
    sys.exit(entrypoint.main())
