"""Bundled networks."""

from importlib import resources

from ..graph import Graph, load_edge_list

BUILTIN = {"karate": ("karate.tsv", "karate_factions.tsv")}


def builtin_text(name: str) -> str:
    edges, _ = BUILTIN[name]
    return resources.files(__package__).joinpath(edges).read_text()


def load_karate() -> tuple[Graph, dict[str, str]]:
    """Zachary's karate club and each member's faction (``Mr_Hi`` / ``Officer``)."""
    g = load_edge_list(builtin_text("karate"))
    factions = {}
    text = resources.files(__package__).joinpath(BUILTIN["karate"][1]).read_text()
    for line in text.splitlines():
        if line.strip():
            node, faction = line.split("\t")
            factions[node] = faction.strip()
    return g, factions
