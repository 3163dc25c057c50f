"""Robot parameter file reader.

One link per line, seventeen whitespace-separated SI values::

    a alpha d theta_off mass cx cy cz Ixx Iyy Izz Ixy Ixz Iyz qmin qmax vmax

Directive lines ``tool x y z``, ``gravity gx gy gz`` and ``name <text>`` set the
tool point, gravity vector and chain name. ``#`` starts a comment.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from sapsim.data import data_path
from sapsim.dynamics.exceptions import ChainDefinitionError
from sapsim.dynamics.models import STANDARD_GRAVITY, KinematicChain, LinkParam

logger = logging.getLogger(__name__)

LINK_COLUMNS = 17
PACKAGED_CHAINS = {
    "reference_arm": "reference_arm.txt",
    "planar_2link": "planar_2link.txt",
    "pendulum": "pendulum.txt",
}


def _parse_floats(tokens: list[str], line_no: int, source: str) -> list[float]:
    try:
        return [float(tok) for tok in tokens]
    except ValueError as e:
        raise ChainDefinitionError(f"{source}:{line_no}: non-numeric value ({e})") from e


def _parse_link(values: list[float]) -> LinkParam:
    a, alpha, d, theta_off, mass, cx, cy, cz = values[:8]
    ixx, iyy, izz, ixy, ixz, iyz = values[8:14]
    q_min, q_max, v_max = values[14:17]
    inertia = np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])
    return LinkParam(
        a=a,
        alpha=alpha,
        d=d,
        theta_offset=theta_off,
        mass=mass,
        com=np.array([cx, cy, cz]),
        inertia=inertia,
        q_min=q_min,
        q_max=q_max,
        v_max=v_max,
    )


def parse_chain(text: str, source: str = "<string>") -> KinematicChain:
    """Build a chain from parameter-file text.

    Args:
        text: File contents.
        source: Name used in diagnostics.

    Returns:
        The parsed KinematicChain.

    Raises:
        ChainDefinitionError: If a line is malformed or a link violates its
            invariants; the message names the source and line.
    """
    links: list[LinkParam] = []
    tool = np.zeros(3)
    gravity = np.array(STANDARD_GRAVITY)
    name = Path(source).stem if source != "<string>" else "chain"

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0].lower()
        if keyword == "name":
            name = " ".join(tokens[1:]) or name
            continue
        if keyword in ("tool", "gravity"):
            if len(tokens) != 4:
                raise ChainDefinitionError(
                    f"{source}:{line_no}: '{keyword}' expects 3 values, got {len(tokens) - 1}"
                )
            vector = np.array(_parse_floats(tokens[1:], line_no, source))
            if keyword == "tool":
                tool = vector
            else:
                gravity = vector
            continue
        if len(tokens) != LINK_COLUMNS:
            raise ChainDefinitionError(
                f"{source}:{line_no}: expected {LINK_COLUMNS} columns, got {len(tokens)}"
            )
        values = _parse_floats(tokens, line_no, source)
        try:
            links.append(_parse_link(values))
        except ChainDefinitionError as e:
            raise ChainDefinitionError(f"{source}:{line_no}: {e}") from e

    try:
        chain = KinematicChain(links=tuple(links), gravity=gravity, tool=tool, name=name)
    except ChainDefinitionError as e:
        raise ChainDefinitionError(f"{source}: {e}") from e
    logger.debug("Loaded chain %s with %d joints from %s", chain.name, chain.n, source)
    return chain


def load_chain(path: str | Path) -> KinematicChain:
    """Read a robot parameter file.

    Raises:
        ChainDefinitionError: If the file is missing or malformed.
    """
    path = Path(path)
    if not path.is_file():
        raise ChainDefinitionError(f"robot parameter file not found: {path}")
    return parse_chain(path.read_text(encoding="utf-8"), source=str(path))


def load_packaged_chain(name: str) -> KinematicChain:
    """Load one of the chains shipped with the package.

    Args:
        name: One of ``reference_arm``, ``planar_2link`` or ``pendulum``.

    Raises:
        ChainDefinitionError: If the name is unknown.
    """
    if name not in PACKAGED_CHAINS:
        known = ", ".join(sorted(PACKAGED_CHAINS))
        raise ChainDefinitionError(f"unknown packaged chain '{name}' (known: {known})")
    return load_chain(data_path(PACKAGED_CHAINS[name]))
