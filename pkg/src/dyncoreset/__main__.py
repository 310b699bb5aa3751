from dyncoreset.cli import main
import sys

sys.exit(main())
