"""Allow ``python -m nmsd``."""

from nmsd.main import main

main()
