"""Parsers and writers for run, gains, cluster and creation-time files.

File formats are documented in ``docs/formats.md``.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, TextIO

from .model import (
    Cluster,
    ConsistencyError,
    GainGrade,
    JudgmentSet,
    ParseError,
    PushRecord,
    check_topic,
)

SNOWFLAKE_EPOCH_MS = 1_288_834_974_657
TIMESTAMP_SHIFT = 22


@dataclass(frozen=True)
class RunFile:
    records: tuple
    run_tag: Optional[str] = None

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _lines(stream):
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def _source_name(stream) -> Optional[str]:
    return getattr(stream, "name", None) if not isinstance(stream, str) else None


def _parse_int(value: str, what: str, lineno: int, source) -> int:
    try:
        number = int(value)
    except ValueError:
        raise ParseError(f"bad {what} {value!r}", lineno, source) from None
    if number < 0:
        raise ParseError(f"negative {what} {value!r}", lineno, source)
    return number


# ---------------------------------------------------------------------------
# runs


def parse_run(stream, run_tag: Optional[str] = None) -> RunFile:
    """Parse a run file: ``topic<TAB>tweet_id<TAB>push_epoch_ms<TAB>run_tag``.

    Records keep file order; duplicates are kept. ``run_tag`` names an empty
    run, and if given must agree with the tags found in the file.
    """
    source = _source_name(stream)
    records = []
    tag = run_tag
    for lineno, line in _lines(stream):
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", lineno, source)
        topic, tweet, push_time, line_tag = (f.strip() for f in fields)
        try:
            check_topic(topic)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, source) from None
        if not line_tag:
            raise ParseError("empty run tag", lineno, source)
        if tag is None:
            tag = line_tag
        elif line_tag != tag:
            raise ConsistencyError(
                f"{source or 'run'}:{lineno}: run tag {line_tag!r} differs from {tag!r}"
            )
        records.append(PushRecord(
            topic=topic,
            tweet=_parse_int(tweet, "tweet id", lineno, source),
            push_time=_parse_int(push_time, "push time", lineno, source),
            run_tag=line_tag,
        ))
    return RunFile(tuple(records), tag)


def format_run(run: RunFile) -> str:
    return "".join(
        f"{r.topic}\t{r.tweet}\t{r.push_time}\t{r.run_tag}\n" for r in run.records
    )


def read_run(path, run_tag: Optional[str] = None) -> RunFile:
    if run_tag is None:
        run_tag = os.path.splitext(os.path.basename(path))[0]
    with open_text(path) as f:
        run = parse_run(f)
    # the file's own tag wins; the file name only names an empty run
    return run if run.run_tag is not None else RunFile((), run_tag)


# ---------------------------------------------------------------------------
# gains


def parse_gains(stream) -> dict:
    """Parse ``topic tweet_id grade`` lines into ``{topic: {tweet: GainGrade}}``.

    Four-column TREC qrels lines (``topic iter tweet_id grade``) are accepted too.
    """
    source = _source_name(stream)
    gains: dict = {}
    for lineno, line in _lines(stream):
        fields = line.split()
        if len(fields) == 4:
            fields = [fields[0], fields[2], fields[3]]
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", lineno, source)
        topic, tweet, grade = fields
        try:
            grade_value = GainGrade(int(grade))
        except ValueError:
            raise ParseError(f"unknown grade {grade!r}", lineno, source) from None
        tweet_id = _parse_int(tweet, "tweet id", lineno, source)
        topic_gains = gains.setdefault(topic, {})
        previous = topic_gains.get(tweet_id)
        if previous is not None and previous is not grade_value:
            raise ConsistencyError(
                f"{source or 'gains'}:{lineno}: conflicting grades for {topic} {tweet_id}"
            )
        topic_gains[tweet_id] = grade_value
    return gains


def format_gains(gains: Mapping) -> str:
    out = []
    for topic in sorted(gains):
        for tweet in sorted(gains[topic]):
            out.append(f"{topic}\t{tweet}\t{gains[topic][tweet].value}\n")
    return "".join(out)


# ---------------------------------------------------------------------------
# clusters


def _tweet_id(value, where: str) -> int:
    if isinstance(value, bool):
        raise ParseError(f"{where}: bad tweet id {value!r}")
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: bad tweet id {value!r}") from None
    if number < 0:
        raise ParseError(f"{where}: negative tweet id {value!r}")
    return number


def parse_cluster_document(stream) -> dict:
    """Read a cluster document into ``{topic: [(cluster_id, [tweet ids])]}``.

    No consistency checking happens here; see :func:`find_violations`.
    Accepted layouts::

        {"MB228": [[1, 2], [3]]}
        {"MB228": {"c1": [1, 2], "c2": [3]}}
        {"topics": {"MB228": {"clusters": [[1, 2], [3]]}}}
    """
    source = _source_name(stream) or "clusters"
    text = stream if isinstance(stream, str) else stream.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, source) from None
    if isinstance(doc, dict) and set(doc) == {"topics"} and isinstance(doc["topics"], dict):
        doc = doc["topics"]
    if not isinstance(doc, dict):
        raise ParseError("top level must map topic ids to clusters", None, source)

    result = {}
    for topic, entry in doc.items():
        try:
            check_topic(topic)
        except ValueError as exc:
            raise ParseError(str(exc), None, source) from None
        if isinstance(entry, dict) and "clusters" in entry:
            entry = entry["clusters"]
        if isinstance(entry, list):
            named = [(f"{topic}.{i}", members) for i, members in enumerate(entry)]
        elif isinstance(entry, dict):
            named = list(entry.items())
        else:
            raise ParseError(f"topic {topic}: clusters must be a list or object", None, source)
        clusters = []
        for cid, members in named:
            where = f"{source}: topic {topic} cluster {cid}"
            if not isinstance(members, list):
                raise ParseError(f"{where}: members must be a list")
            clusters.append((str(cid), [_tweet_id(m, where) for m in members]))
        result[topic] = clusters
    return result


def format_clusters(clusters: Mapping) -> str:
    """Write ``{topic: tuple[Cluster]}`` as a cluster document with explicit ids."""
    doc = {
        topic: {c.id: sorted(c.members) for c in clusters[topic]}
        for topic in sorted(clusters)
    }
    return json.dumps(doc, indent=1) + "\n"


def parse_clusters(stream, creation_times: Optional[Mapping] = None) -> dict:
    """Parse and validate a cluster document into ``{topic: tuple[Cluster]}``."""
    raw = parse_cluster_document(stream)
    problems = [v for v in _cluster_violations(raw, creation_times or {})]
    if problems:
        raise ConsistencyError(problems[0])
    return _build_clusters(raw, creation_times or {})


# ---------------------------------------------------------------------------
# creation times


def parse_creation_times(stream) -> dict:
    """Parse an override file of ``tweet_id<TAB>epoch_ms`` lines."""
    source = _source_name(stream)
    times = {}
    for lineno, line in _lines(stream):
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected 2 fields, got {len(fields)}", lineno, source)
        times[_parse_int(fields[0], "tweet id", lineno, source)] = _parse_int(
            fields[1], "creation time", lineno, source
        )
    return times


def format_creation_times(times: Mapping) -> str:
    return "".join(f"{tweet}\t{times[tweet]}\n" for tweet in sorted(times))


def creation_time(tweet: int, overrides: Optional[Mapping] = None) -> int:
    """Creation time of ``tweet``: the override if present, else its Snowflake timestamp."""
    if overrides and tweet in overrides:
        return overrides[tweet]
    if tweet >> TIMESTAMP_SHIFT == 0:
        raise ValueError(f"tweet {tweet} is not a Snowflake id and has no creation-time override")
    return (tweet >> TIMESTAMP_SHIFT) + SNOWFLAKE_EPOCH_MS


def snowflake_id(created_ms: int, sequence: int = 0) -> int:
    """Smallest-style Snowflake id whose timestamp bits encode ``created_ms``."""
    if created_ms < SNOWFLAKE_EPOCH_MS:
        raise ValueError("time precedes the Snowflake epoch")
    if not 0 <= sequence < (1 << TIMESTAMP_SHIFT):
        raise ValueError("sequence must fit in 22 bits")
    return ((created_ms - SNOWFLAKE_EPOCH_MS) << TIMESTAMP_SHIFT) | sequence


# ---------------------------------------------------------------------------
# judgment assembly


def _resolve(tweet, overrides):
    try:
        return creation_time(tweet, overrides)
    except ValueError:
        return None


def _cluster_violations(raw: Mapping, overrides: Mapping) -> Iterable[str]:
    for topic in sorted(raw):
        owner = {}
        for cid, members in raw[topic]:
            if not members:
                yield f"topic {topic}: cluster {cid} is empty"
            for tweet in members:
                if tweet in owner and owner[tweet] != cid:
                    yield (f"topic {topic}: tweet {tweet} is in clusters "
                           f"{owner[tweet]} and {cid}")
                    continue
                owner.setdefault(tweet, cid)
                if _resolve(tweet, overrides) is None:
                    yield f"topic {topic}: tweet {tweet} in cluster {cid} has no creation time"


def find_violations(gains: Mapping, raw_clusters: Mapping,
                    overrides: Optional[Mapping] = None) -> list:
    """Every structural problem preventing ``gains`` + ``raw_clusters`` from being scored."""
    overrides = overrides or {}
    problems = list(_cluster_violations(raw_clusters, overrides))
    for topic in sorted(set(gains) | set(raw_clusters)):
        grades = gains.get(topic, {})
        clustered = {}
        for cid, members in raw_clusters.get(topic, ()):
            for tweet in members:
                clustered.setdefault(tweet, cid)
        for tweet in sorted(clustered):
            grade = grades.get(tweet)
            if grade is None:
                problems.append(f"topic {topic}: clustered tweet {tweet} "
                                f"(cluster {clustered[tweet]}) has no grade")
            elif not grade.is_relevant:
                problems.append(f"topic {topic}: clustered tweet {tweet} "
                                f"(cluster {clustered[tweet]}) is graded non-relevant")
        for tweet in sorted(grades):
            if grades[tweet].is_relevant and tweet not in clustered:
                problems.append(f"topic {topic}: relevant tweet {tweet} is not in any cluster")
    return problems


def _build_clusters(raw: Mapping, overrides: Mapping) -> dict:
    result = {}
    for topic in sorted(raw):
        clusters = []
        for cid, members in raw[topic]:
            times = [creation_time(t, overrides) for t in members]
            clusters.append(Cluster(cid, topic, frozenset(members), min(times)))
        result[topic] = tuple(clusters)
    return result


def build_judgments(gains: Mapping, raw_clusters: Mapping,
                    overrides: Optional[Mapping] = None) -> JudgmentSet:
    """Assemble a :class:`JudgmentSet`, raising on the first consistency violation."""
    overrides = dict(overrides or {})
    problems = find_violations(gains, raw_clusters, overrides)
    if problems:
        more = f" (and {len(problems) - 1} more)" if len(problems) > 1 else ""
        raise ConsistencyError(problems[0] + more)
    clusters = _build_clusters(raw_clusters, overrides)
    times = dict(overrides)
    for topic_clusters in clusters.values():
        for cluster in topic_clusters:
            for tweet in cluster.members:
                times.setdefault(tweet, creation_time(tweet, overrides))
    return JudgmentSet(
        grades={t: dict(g) for t, g in gains.items()},
        clusters=clusters,
        creation_times=times,
    )


def open_text(path) -> TextIO:
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", None, str(path)) from None


def load_judgments(gains_path, clusters_path, creation_times_path=None) -> JudgmentSet:
    with open_text(gains_path) as f:
        gains = parse_gains(f)
    with open_text(clusters_path) as f:
        raw = parse_cluster_document(f)
    overrides = {}
    if creation_times_path is not None:
        with open_text(creation_times_path) as f:
            overrides = parse_creation_times(f)
    return build_judgments(gains, raw, overrides)
