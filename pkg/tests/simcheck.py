"""Timeline checks applied to a SimulationLog from the outside."""

from hmsplace.solver import Direction


def in_flight_overlaps(log, eps=1e-12):
    """(object, phase) pairs where a move of the object overlaps a phase using it."""
    bad = []
    for oid, _, m_start, m_end, _ in log.moves:
        for k, p, start, end, refs in log.phases:
            if oid in refs and m_start < end - eps and start < m_end - eps:
                bad.append((oid, k, p))
    return bad


def min_dram_free(log):
    """Smallest free capacity at any event, counting inbound moves from their start."""
    events = sorted({t for _, _, s, e, _ in log.moves for t in (s, e)}
                    | {s for _, _, s, _, _ in log.phases})
    worst = log.capacity - log.initial_used
    for t in events:
        used = log.initial_used
        for _, direction, start, end, g in log.moves:
            if direction is Direction.TO_DRAM and start <= t:
                used += g
            elif direction is Direction.TO_NVM and end <= t:
                used -= g
        worst = min(worst, log.capacity - used)
    return worst
