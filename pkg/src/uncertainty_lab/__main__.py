"""Entry point for running uncertainty_lab as a module: python -m uncertainty_lab"""

from uncertainty_lab import main

if __name__ == "__main__":
    raise SystemExit(main())
