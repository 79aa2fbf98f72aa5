import re

_BAD = re.compile(r"[^a-z0-9_-]+")


class NameCollision(ValueError):
    pass


def sanitize(name: str) -> str:
    """Lowercase PDDL identifier: runs of other characters become ``_``."""
    out = _BAD.sub("_", name.lower()).strip("_")
    if not out:
        raise ValueError(f"{name!r} has no identifier characters")
    if not out[0].isalpha():
        out = "f_" + out
    return out


def sanitize_all(names) -> list[str]:
    """Sanitize a name list, raising NameCollision if two names merge."""
    seen: dict[str, str] = {}
    out = []
    for n in names:
        s = sanitize(n)
        if s in seen and seen[s] != n:
            raise NameCollision(f"{seen[s]!r} and {n!r} both sanitize to {s!r}")
        seen[s] = n
        out.append(s)
    return out
