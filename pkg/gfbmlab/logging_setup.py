import logging
from .config import LOG_LEVEL

class Color:
    RESET="\x1b[0m"; GRAY="\x1b[90m"; GREEN="\x1b[32m"; YELLOW="\x1b[33m"; RED="\x1b[31m"
    BLUE="\x1b[34m"; CYAN="\x1b[36m"; BOLD="\x1b[1m"

class ColorFormatter(logging.Formatter):
    COLORS={"DEBUG":Color.BLUE,"INFO":Color.GREEN,"WARNING":Color.YELLOW,"ERROR":Color.RED,"CRITICAL":Color.RED+Color.BOLD}
    def __init__(self, fmt="%(message)s", use_color=True):
        super().__init__(fmt); self.use_color = use_color
    def paint(self, color, s):
        return f"{color}{s}{Color.RESET}" if self.use_color else s
    def format(self, rec):
        lvl=self.paint(self.COLORS.get(rec.levelname,''), rec.levelname)
        t=self.paint(Color.GRAY, self.formatTime(rec, '%H:%M:%S'))
        name=self.paint(Color.CYAN, rec.name)
        return f"{t} | {lvl} | {name} | {super().format(rec)}"

def setup_logging(level=None):
    root = logging.getLogger()
    root.setLevel(level or LOG_LEVEL)
    h = logging.StreamHandler()
    h.setFormatter(ColorFormatter(use_color=h.stream.isatty()))
    root.handlers[:] = [h]
    logging.captureWarnings(True)
    logging.getLogger("py.warnings").setLevel(logging.ERROR)

log = logging.getLogger("gfbm-lab")
