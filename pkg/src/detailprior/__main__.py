import sys

from detailprior.cli import main

sys.exit(main())
