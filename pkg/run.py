import sys
from dotenv import load_dotenv
load_dotenv()

from gfbmlab.logging_setup import setup_logging
from gfbmlab.cli import main

if __name__ == "__main__":
    setup_logging()
    sys.exit(main())
