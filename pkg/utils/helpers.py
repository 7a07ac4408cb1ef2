"""
Helper Functions

Formatting utilities for console summaries.
"""

import math
from datetime import datetime
from typing import Optional


def format_value(value, digits: int = 6) -> str:
    """Compact numeric formatting; None prints as n/a."""
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{digits}g}"
    return str(value)


def format_duration(start: datetime, end: Optional[datetime] = None) -> str:
    """Format duration between two times."""
    if end is None:
        end = datetime.now()

    seconds = (end - start).total_seconds()

    if seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        return f"{seconds / 60:.1f}m"
    return f"{seconds / 3600:.1f}h"


def print_table(data: list, headers: list, title: str = None):
    """Print data as a formatted table."""
    if title:
        print(f"\n{title}")
        print("=" * 60)

    rows = [[format_value(v) for v in row] for row in data]
    widths = [len(h) for h in headers]
    for row in rows:
        for i, val in enumerate(row):
            widths[i] = max(widths[i], len(val))

    header_row = " | ".join(h.ljust(widths[i]) for i, h in enumerate(headers))
    print(header_row)
    print("-" * len(header_row))

    for row in rows:
        print(" | ".join(v.ljust(widths[i]) for i, v in enumerate(row)))

    print()
