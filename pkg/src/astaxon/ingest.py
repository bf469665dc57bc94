"""Parsers for routing/registry inputs and assembly of the AS attribute table.

Input formats (UTF-8, ``#`` starts a comment):

* routes: ``A.B.C.D/L ASN ASN ...``; AS sets written as ``{n1,n2,...}``.
* relationships: ``a|b|code``; ``-1`` means *a is the provider of b*,
  ``0`` means *a and b are peers*.
* descriptions: ``ASN<TAB>free text``.
* dataset: ``asn|customers|providers|peers|prefixes|space|terms|label``
  where ``terms`` is space-joined and ``label`` is a class token or empty.
"""

from __future__ import annotations

import ipaddress
import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Set, TextIO, Tuple

from .core import AsClass, AsRecord, EmptyDatasetError, FormatError, LabeledExample
from .textprep import StopWordList, preprocess

log = logging.getLogger(__name__)

PRIVATE_ASN_MIN = 64512
PRIVATE_ASN_MAX = 65535
MAX_ASN = 2**32 - 1

CUSTOMER_TO_PROVIDER = "c2p"
PEER_TO_PEER = "p2p"

_AS_SET_RE = re.compile(r"\{[^{}]*\}")


class RelationshipConflictError(FormatError):
    """Two lines annotate the same AS pair differently."""

    def __init__(self, pair: Tuple[int, int], line: int):
        self.pair = pair
        super().__init__(f"conflicting relationship annotations for AS pair {pair[0]}-{pair[1]}", line)


@dataclass(frozen=True)
class RouteEntry:
    prefix: ipaddress.IPv4Network
    as_path: Tuple[int, ...]

    @property
    def origin(self) -> int:
        return self.as_path[-1]


@dataclass(frozen=True)
class RelationshipLink:
    """``kind == "c2p"``: *a* is a customer of *b*.  Peer links have a < b."""

    a: int
    b: int
    kind: str

    @property
    def pair(self) -> Tuple[int, int]:
        return (min(self.a, self.b), max(self.a, self.b))


def is_private_asn(asn: int) -> bool:
    return PRIVATE_ASN_MIN <= asn <= PRIVATE_ASN_MAX


def _content_lines(stream: Iterable[str]):
    for lineno, raw in enumerate(stream, 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_asn(token: str) -> int:
    if not (token.isascii() and token.isdigit()):
        raise ValueError(f"bad ASN {token!r}")
    asn = int(token)
    if not 0 < asn <= MAX_ASN:
        raise ValueError(f"ASN out of range: {token}")
    return asn


def parse_routes(stream: Iterable[str], stats: Optional[Counter] = None) -> List[RouteEntry]:
    """Parse a routes file into cleaned entries.

    AS sets and private ASNs are removed and prepending is collapsed.
    Malformed lines and lines whose path cleans to nothing are skipped and
    tallied in ``stats`` under ``malformed`` and ``empty_path``.
    """
    stats = Counter() if stats is None else stats
    entries = []
    for lineno, line in _content_lines(stream):
        fields = line.split(None, 1)
        try:
            prefix = ipaddress.IPv4Network(fields[0], strict=True)
            path_text = _AS_SET_RE.sub(" ", fields[1] if len(fields) > 1 else "")
            if "{" in path_text or "}" in path_text:
                raise ValueError("unbalanced AS set")
            raw_path = [_parse_asn(tok) for tok in path_text.split()]
        except ValueError as exc:
            stats["malformed"] += 1
            log.debug("routes line %d skipped: %s", lineno, exc)
            continue
        if not raw_path and len(fields) < 2:
            stats["malformed"] += 1
            continue
        path: List[int] = []
        for asn in raw_path:
            if is_private_asn(asn):
                continue
            if not path or path[-1] != asn:
                path.append(asn)
        if not path:
            stats["empty_path"] += 1
            continue
        entries.append(RouteEntry(prefix, tuple(path)))
    stats["routes"] += len(entries)
    if not entries:
        raise EmptyDatasetError("no valid route lines")
    return entries


def parse_relationships(stream: Iterable[str], stats: Optional[Counter] = None) -> List[RelationshipLink]:
    """Parse ``a|b|code`` lines into deduplicated links, in first-seen order."""
    stats = Counter() if stats is None else stats
    seen: Dict[Tuple[int, int], RelationshipLink] = {}
    for lineno, line in _content_lines(stream):
        fields = line.split("|")
        try:
            if len(fields) < 3:
                raise ValueError("expected a|b|code")
            a, b = _parse_asn(fields[0]), _parse_asn(fields[1])
            code = int(fields[2])
            if a == b:
                raise ValueError("self link")
            if is_private_asn(a) or is_private_asn(b):
                raise ValueError("private ASN")
            if code == -1:
                link = RelationshipLink(b, a, CUSTOMER_TO_PROVIDER)
            elif code == 0:
                link = RelationshipLink(min(a, b), max(a, b), PEER_TO_PEER)
            else:
                raise ValueError(f"unknown relationship code {code}")
        except ValueError as exc:
            stats["malformed"] += 1
            log.debug("relationships line %d skipped: %s", lineno, exc)
            continue
        prior = seen.get(link.pair)
        if prior is None:
            seen[link.pair] = link
        elif prior != link:
            raise RelationshipConflictError(link.pair, lineno)
        else:
            stats["duplicate"] += 1
    stats["links"] += len(seen)
    return list(seen.values())


def degree_table(links: Iterable[RelationshipLink]) -> Dict[int, Tuple[int, int, int]]:
    """Map ASN -> (customers, providers, peers) for every link endpoint."""
    customers: Dict[int, Set[int]] = defaultdict(set)
    providers: Dict[int, Set[int]] = defaultdict(set)
    peers: Dict[int, Set[int]] = defaultdict(set)
    for link in links:
        if link.kind == CUSTOMER_TO_PROVIDER:
            customers[link.b].add(link.a)
            providers[link.a].add(link.b)
        else:
            peers[link.a].add(link.b)
            peers[link.b].add(link.a)
    asns = set(customers) | set(providers) | set(peers)
    return {
        asn: (len(customers.get(asn, ())), len(providers.get(asn, ())), len(peers.get(asn, ())))
        for asn in asns
    }


def degree_attributes(links: Iterable[RelationshipLink], asn: int) -> Tuple[int, int, int]:
    return degree_table(links).get(asn, (0, 0, 0))


def origin_prefixes(routes: Iterable[RouteEntry]) -> Dict[int, Set[ipaddress.IPv4Network]]:
    table: Dict[int, Set[ipaddress.IPv4Network]] = defaultdict(set)
    for route in routes:
        table[route.origin].add(route.prefix)
    return dict(table)


def prefix_count(routes: Iterable[RouteEntry], asn: int) -> int:
    return len(origin_prefixes(routes).get(asn, ()))


def space_attribute(prefixes: Iterable[ipaddress.IPv4Network]) -> int:
    """Number of distinct /24 blocks covered by the union of ``prefixes``.

    A prefix longer than /24 counts as the single /24 that contains it.
    """
    intervals = []
    for net in prefixes:
        start = int(net.network_address) >> 8
        width = 1 << (24 - net.prefixlen) if net.prefixlen <= 24 else 1
        intervals.append((start, start + width))
    intervals.sort()
    total = 0
    cur_start = cur_end = None
    for start, end in intervals:
        if cur_end is None or start > cur_end:
            if cur_end is not None:
                total += cur_end - cur_start
            cur_start, cur_end = start, end
        elif end > cur_end:
            cur_end = end
    if cur_end is not None:
        total += cur_end - cur_start
    return total


def parse_descriptions(stream: Iterable[str], stats: Optional[Counter] = None) -> Dict[int, str]:
    stats = Counter() if stats is None else stats
    out: Dict[int, str] = {}
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        asn_text, sep, descr = line.partition("\t")
        try:
            if not sep:
                raise ValueError("missing tab separator")
            asn = _parse_asn(asn_text.strip())
        except ValueError as exc:
            stats["malformed"] += 1
            log.debug("descriptions line %d skipped: %s", lineno, exc)
            continue
        if asn in out:
            stats["duplicate"] += 1
        out[asn] = descr.strip()
    stats["descriptions"] += len(out)
    return out


def assemble(
    routes: Iterable[RouteEntry],
    links: Iterable[RelationshipLink],
    descriptions: Mapping[int, str],
    stoplist: StopWordList,
    topology_routes: Iterable[RouteEntry] = (),
) -> List[AsRecord]:
    """Join all sources into one record per AS, sorted by ASN.

    Prefix and space attributes come from ``routes``; every AS seen on a
    ``topology_routes`` path joins the universe with whatever attributes the
    other sources provide.
    """
    prefixes_by_origin = origin_prefixes(routes)
    degrees = degree_table(links)
    universe = set(prefixes_by_origin) | set(degrees) | set(descriptions)
    for route in topology_routes:
        universe.update(route.as_path)
    if not universe:
        raise EmptyDatasetError("no ASes found in any input")

    records = []
    for asn in sorted(universe):
        nets = prefixes_by_origin.get(asn, set())
        customers, providers, peers = degrees.get(asn, (0, 0, 0))
        records.append(
            AsRecord(
                asn=asn,
                description_terms=tuple(preprocess(descriptions.get(asn, ""), stoplist)),
                customers=customers,
                providers=providers,
                peers=peers,
                prefixes=len(nets),
                space=space_attribute(nets),
            )
        )
    return records


def format_dataset_line(record: AsRecord, label: Optional[AsClass] = None) -> str:
    return "|".join(
        [
            str(record.asn),
            str(record.customers),
            str(record.providers),
            str(record.peers),
            str(record.prefixes),
            str(record.space),
            " ".join(record.description_terms),
            label.token if label is not None else "",
        ]
    )


def write_dataset(rows: Iterable[Tuple[AsRecord, Optional[AsClass]]], sink: TextIO) -> int:
    n = 0
    for record, label in rows:
        sink.write(format_dataset_line(record, label) + "\n")
        n += 1
    return n


def read_dataset(stream: Iterable[str]) -> List[Tuple[AsRecord, Optional[AsClass]]]:
    """Read dataset rows; any malformed row is fatal."""
    rows = []
    seen = set()
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("|")
        if len(fields) != 8:
            raise FormatError(f"expected 8 '|'-separated fields, got {len(fields)}", lineno)
        try:
            asn, customers, providers, peers, prefixes, space = (int(f) for f in fields[:6])
            record = AsRecord(asn, tuple(fields[6].split()), customers, providers, peers, prefixes, space)
            label = AsClass.from_token(fields[7].strip()) if fields[7].strip() else None
        except ValueError as exc:
            raise FormatError(str(exc), lineno) from None
        if asn in seen:
            raise FormatError(f"duplicate asn {asn}", lineno)
        seen.add(asn)
        rows.append((record, label))
    return rows


def labeled_examples(rows: Iterable[Tuple[AsRecord, Optional[AsClass]]]) -> List[LabeledExample]:
    return [LabeledExample(record, label) for record, label in rows if label is not None]
