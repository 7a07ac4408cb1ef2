# Utils module
from .logger import get_logger
from .helpers import format_value, print_table
