import sys

from lzsmcap.cli import main

sys.exit(main())
