"""Forensic analysis over the simulated chain.

Builds a value-flow graph from the blocks and answers the questions an
investigator asks of it: where did funds from a known address go
(poison and haircut taint), which addresses look co-owned (common-input
clustering), and how much does a shielded spend actually hide (the
anonymity set is the whole ring until a warranted registry reveal
narrows it).

Taint arithmetic uses exact integer ratios, never floats. Transparent
and shielded value pools never mix on this chain, so taint propagates
along transparent edges; shielded spends are analysed through their
candidate sets instead.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import networkx as nx

from .group import get_group
from .ledger import Block, MintTx, ShieldedTx, TransparentTx
from .regmap import AuditEntry, reveals_from_log, verify_audit_chain

FEE_SINK = "(fees)"


class UnknownAddress(ValueError):
    """Source address does not appear in the graph."""


class UnknownTx(ValueError):
    """Transaction id not found on the chain, or not shielded."""


class UnverifiedReveal(ValueError):
    """Reveal evidence rejected because its audit chain does not verify."""


def addr_node(address: str) -> str:
    return f"addr:{address}"


def tx_node(txid: str) -> str:
    return f"tx:{txid}"


def sout_node(ref: int) -> str:
    return f"sout:{ref}"


@dataclass
class TxGraph:
    """Value-flow multigraph plus the shielded-output registry view."""

    graph: nx.MultiDiGraph
    tx_heights: dict
    shielded_outputs: list  # per registry ref: dict with keys r, p, amount, txid

    def addresses(self) -> list[str]:
        return sorted(
            node[5:] for node in self.graph.nodes if node.startswith("addr:")
        )

    def node_count(self) -> int:
        return self.graph.number_of_nodes()

    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def to_dict(self) -> dict:
        edges = sorted(
            [u, v, data["kind"], data["amount"], data["height"], data.get("ref", "")]
            for u, v, data in self.graph.edges(data=True)
        )
        return {"nodes": sorted(self.graph.nodes), "edges": edges}


def build_graph(blocks: list[Block]) -> TxGraph:
    """Deterministic reconstruction of every value flow on the chain."""
    graph = nx.MultiDiGraph()
    tx_heights = {}
    shielded_outputs = []
    utxo_owner = {}  # (txid, vout) -> (address, amount)

    for block in blocks:
        for tx in block.transactions:
            txid = tx.txid()
            tnode = tx_node(txid)
            graph.add_node(tnode, kind="tx", height=block.height)
            tx_heights[txid] = block.height

            if isinstance(tx, MintTx):
                group = get_group(tx.backend)
                for vout, out in enumerate(tx.transparent_outputs):
                    utxo_owner[(txid, vout)] = (out.address, out.amount)
                    graph.add_node(addr_node(out.address), kind="address")
                    graph.add_edge(
                        tnode,
                        addr_node(out.address),
                        kind="output",
                        amount=out.amount,
                        height=block.height,
                        ref=f"{txid}:{vout}",
                    )
                for out in tx.shielded_outputs:
                    ref = len(shielded_outputs)
                    shielded_outputs.append(
                        {
                            "r": group.encode_point(out.meta.tx_public).hex(),
                            "p": group.encode_point(out.meta.onetime_public).hex(),
                            "amount": out.amount,
                            "txid": txid,
                        }
                    )
                    graph.add_node(sout_node(ref), kind="shielded-output")
                    graph.add_edge(
                        tnode,
                        sout_node(ref),
                        kind="shielded-output",
                        amount=out.amount,
                        height=block.height,
                        ref=str(ref),
                    )
            elif isinstance(tx, TransparentTx):
                for tx_input in tx.inputs:
                    address, amount = utxo_owner.pop(tx_input.ref())
                    graph.add_edge(
                        addr_node(address),
                        tnode,
                        kind="spend",
                        amount=amount,
                        height=block.height,
                        ref=f"{tx_input.txid}:{tx_input.vout}",
                    )
                for vout, out in enumerate(tx.outputs):
                    utxo_owner[(txid, vout)] = (out.address, out.amount)
                    graph.add_node(addr_node(out.address), kind="address")
                    graph.add_edge(
                        tnode,
                        addr_node(out.address),
                        kind="output",
                        amount=out.amount,
                        height=block.height,
                        ref=f"{txid}:{vout}",
                    )
                if tx.fee:
                    graph.add_node(FEE_SINK, kind="fee-sink")
                    graph.add_edge(
                        tnode,
                        FEE_SINK,
                        kind="fee",
                        amount=tx.fee,
                        height=block.height,
                        ref=f"{txid}:fee",
                    )
            elif isinstance(tx, ShieldedTx):
                group = get_group(tx.lsag.backend)
                for ref in tx.ring_member_refs:
                    graph.add_edge(
                        sout_node(ref),
                        tnode,
                        kind="ring-member",
                        amount=shielded_outputs[ref]["amount"],
                        height=block.height,
                        ref=str(ref),
                    )
                for out in tx.outputs:
                    ref = len(shielded_outputs)
                    shielded_outputs.append(
                        {
                            "r": group.encode_point(out.meta.tx_public).hex(),
                            "p": group.encode_point(out.meta.onetime_public).hex(),
                            "amount": out.amount,
                            "txid": txid,
                        }
                    )
                    graph.add_node(sout_node(ref), kind="shielded-output")
                    graph.add_edge(
                        tnode,
                        sout_node(ref),
                        kind="shielded-output",
                        amount=out.amount,
                        height=block.height,
                        ref=str(ref),
                    )
                if tx.fee:
                    graph.add_node(FEE_SINK, kind="fee-sink")
                    graph.add_edge(
                        tnode,
                        FEE_SINK,
                        kind="fee",
                        amount=tx.fee,
                        height=block.height,
                        ref=f"{txid}:fee",
                    )
    return TxGraph(graph, tx_heights, shielded_outputs)


# -- taint ---------------------------------------------------------------------


@dataclass(frozen=True)
class TaintReport:
    source: str
    policy: str  # "poison" | "haircut"
    fractions: dict  # address (or FEE_SINK) -> Fraction in [0, 1]
    max_depth: int | None

    def to_records(self) -> list[dict]:
        rows = []
        for address in sorted(self.fractions, key=lambda a: (-self.fractions[a], a)):
            fraction = self.fractions[address]
            rows.append(
                {
                    "address": address,
                    "taint": f"{fraction.numerator}/{fraction.denominator}",
                    "taint_float": float(fraction),
                }
            )
        return rows


def taint_trace(
    tx_graph: TxGraph, source: str, policy: str = "poison", max_depth: int | None = None
) -> TaintReport:
    if policy not in ("poison", "haircut"):
        raise ValueError(f"unknown taint policy {policy!r}")
    if addr_node(source) not in tx_graph.graph:
        raise UnknownAddress(f"{source} never appears on this chain")
    if policy == "poison":
        fractions = _poison(tx_graph.graph, source, max_depth)
    else:
        fractions = _haircut(tx_graph.graph, source, max_depth)
    return TaintReport(source, policy, fractions, max_depth)


def _poison(graph: nx.MultiDiGraph, source: str, max_depth: int | None) -> dict:
    """Reachability marking: once tainted, always tainted."""
    tainted = {addr_node(source)}
    frontier = {addr_node(source)}
    depth = 0
    while frontier and (max_depth is None or depth < max_depth):
        next_frontier = set()
        for node in frontier:
            for _, tnode, data in graph.out_edges(node, data=True):
                if data["kind"] != "spend":
                    continue
                for _, out_node, out_data in graph.out_edges(tnode, data=True):
                    if out_data["kind"] == "output" and out_node not in tainted:
                        tainted.add(out_node)
                        next_frontier.add(out_node)
        frontier = next_frontier
        depth += 1
    return {
        node[5:]: Fraction(1)
        for node in tainted
        if node.startswith("addr:")
    }


def _haircut(graph: nx.MultiDiGraph, source: str, max_depth: int | None) -> dict:
    """Proportional flow of the source's received value.

    Mass is tracked per output; each transaction forwards its incoming
    tainted mass pro-rata across outputs and fee, so mass leaving always
    equals mass entering. The report shows where tainted value rests
    after at most max_depth transaction hops, as a fraction of the
    source's total receipts.
    """
    mass = {}  # output ref -> Fraction of tainted value sitting on it
    ref_target = {}  # output ref -> address node or FEE_SINK
    initial = Fraction(0)
    for _, out_node, data in graph.in_edges(addr_node(source), data=True):
        pass  # placeholder, replaced below
    for u, v, data in graph.in_edges(addr_node(source), data=True):
        if data["kind"] == "output":
            mass[data["ref"]] = Fraction(data["amount"])
            ref_target[data["ref"]] = v
            initial += data["amount"]
    if initial == 0:
        return {source: Fraction(0)}

    # Spending tx of each output ref, discovered from spend edges.
    spender = {}
    tx_outputs = {}
    for u, v, data in graph.edges(data=True):
        if data["kind"] == "spend":
            spender[data["ref"]] = v
        elif data["kind"] in ("output", "fee"):
            tx_outputs.setdefault(u, []).append((data["ref"], data["amount"], v))

    depth = 0
    frontier = set(mass)
    while frontier and (max_depth is None or depth < max_depth):
        # group this wave's spent refs by consuming transaction
        by_tx = {}
        for ref in frontier:
            if ref in spender:
                by_tx.setdefault(spender[ref], []).append(ref)
        next_frontier = set()
        for tnode, refs in sorted(by_tx.items()):
            taint_in = sum((mass.pop(ref) for ref in refs), Fraction(0))
            outputs = tx_outputs.get(tnode, [])
            total_out = sum(amount for _, amount, _ in outputs)
            if total_out == 0:
                continue
            for out_ref, amount, target in outputs:
                share = taint_in * Fraction(amount, total_out)
                if share == 0:
                    continue
                mass[out_ref] = mass.get(out_ref, Fraction(0)) + share
                ref_target[out_ref] = target
                if target != FEE_SINK:
                    next_frontier.add(out_ref)
        frontier = next_frontier
        depth += 1

    resting = {}
    for ref, value in mass.items():
        target = ref_target[ref]
        label = target[5:] if target.startswith("addr:") else target
        resting[label] = resting.get(label, Fraction(0)) + value
    return {label: value / initial for label, value in resting.items() if value > 0}


# -- clustering ------------------------------------------------------------------


def cluster_common_input(tx_graph: TxGraph) -> list[frozenset]:
    """Partition addresses: inputs co-spent by one tx imply one owner."""
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for address in tx_graph.addresses():
        parent[address] = address

    spenders_by_tx = {}
    for u, v, data in tx_graph.graph.edges(data=True):
        if data["kind"] == "spend":
            spenders_by_tx.setdefault(v, set()).add(u[5:])
    for spenders in spenders_by_tx.values():
        spenders = sorted(spenders)
        for other in spenders[1:]:
            union(spenders[0], other)

    clusters = {}
    for address in parent:
        clusters.setdefault(find(address), set()).add(address)
    return sorted(
        (frozenset(members) for members in clusters.values()), key=lambda c: min(c)
    )


# -- shielded anonymity sets -------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    ref: int
    onetime_public: str  # hex
    tx_public: str  # hex, the registration handle in the mapping registry


@dataclass(frozen=True)
class AnonymitySetReport:
    txid: str
    candidates: tuple
    set_size: int

    def to_records(self) -> list[dict]:
        return [
            {
                "txid": self.txid,
                "ref": c.ref,
                "onetime_public": c.onetime_public,
                "tx_public": c.tx_public,
                "set_size": self.set_size,
            }
            for c in self.candidates
        ]


def shielded_candidates(blocks: list[Block], txid: str) -> AnonymitySetReport:
    """The plausible true inputs of a shielded spend: its whole ring."""
    tx_graph = build_graph(blocks)
    for block in blocks:
        for tx in block.transactions:
            if isinstance(tx, ShieldedTx) and tx.txid() == txid:
                candidates = tuple(
                    Candidate(
                        ref,
                        tx_graph.shielded_outputs[ref]["p"],
                        tx_graph.shielded_outputs[ref]["r"],
                    )
                    for ref in tx.ring_member_refs
                )
                return AnonymitySetReport(txid, candidates, len(candidates))
    raise UnknownTx(f"no shielded transaction {txid} on this chain")


def resolve_with_regmap(
    report: AnonymitySetReport,
    log: list[AuditEntry],
    suspect_identity: str,
    declared_length: int | None = None,
) -> AnonymitySetReport:
    """Narrow a candidate set using warranted registry reveals.

    Reveal evidence counts only if its audit chain verifies. A reveal
    naming the suspect pins the set to the matching candidates; reveals
    naming someone else eliminate their candidates; unrevealed
    candidates always stay. Narrowing is monotone.
    """
    verdict = verify_audit_chain(log, declared_length)
    if not verdict:
        raise UnverifiedReveal(
            f"audit chain broken at {verdict.broken_at}"
            if verdict.broken_at is not None
            else "audit log shorter than its declared length"
        )
    reveals = reveals_from_log(log)
    matching = tuple(
        c for c in report.candidates if reveals.get(c.tx_public) == suspect_identity
    )
    if matching:
        narrowed = matching
    else:
        narrowed = tuple(
            c
            for c in report.candidates
            if c.tx_public not in reveals
        )
    return replace(report, candidates=narrowed, set_size=len(narrowed))


# -- DOT export --------------------------------------------------------------------

_DOT_SHAPES = {
    "address": "ellipse",
    "tx": "box",
    "shielded-output": "diamond",
    "fee-sink": "hexagon",
}


def graph_to_dot(tx_graph: TxGraph) -> str:
    """Deterministic DOT rendering of the value-flow graph."""
    lines = ["digraph fogtrace {", "  rankdir=LR;"]
    for node in sorted(tx_graph.graph.nodes):
        kind = tx_graph.graph.nodes[node].get("kind", "address")
        label = node if len(node) <= 24 else node[:21] + "..."
        lines.append(
            f'  "{node}" [shape={_DOT_SHAPES.get(kind, "ellipse")}, label="{label}"];'
        )
    for u, v, data in sorted(
        tx_graph.graph.edges(data=True), key=lambda e: (e[0], e[1], e[2]["ref"])
    ):
        style = ' style=dashed' if data["kind"] == "ring-member" else ""
        lines.append(
            f'  "{u}" -> "{v}" [label="{data["amount"]}"{style}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
