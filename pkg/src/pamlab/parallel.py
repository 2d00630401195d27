"""Order-preserving process-pool map.

Work is always split into the same chunks whatever the worker count, and each
chunk carries its own seed, so results do not depend on ``workers``.
"""

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_workers(workers):
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return int(workers)


def pmap(fn, items, workers=1):
    """``[fn(x) for x in items]``, optionally spread over processes.

    ``fn`` must be a module-level callable so it can be pickled.
    """
    items = list(items)
    workers = min(resolve_workers(workers), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def chunk_sizes(total, chunk):
    """Split ``total`` into fixed-size chunks (last one possibly shorter)."""
    out = [chunk] * (total // chunk)
    if total % chunk:
        out.append(total % chunk)
    return out
