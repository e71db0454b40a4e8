import sys

from weakgauss.cli import main

sys.exit(main())
