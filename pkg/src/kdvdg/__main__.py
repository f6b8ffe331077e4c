import sys

from kdvdg.cli import main

sys.exit(main())
