"""Persistent channel store: an append-only event log with replayed state.

Every mutation is one JSON line (channel created, review decision); the
current state of each channel is recovered by replaying the log in order.
Mutations serialize through an in-process lock; cross-process pipeline runs
take a file lease.
"""

from __future__ import annotations

import contextlib
import json
import os
import threading
import time
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .catalog import TopicSource, TopicTitle
from .errors import ConflictError, DataError, ValidationError
from .qc import Channel, ChannelStatus

Clock = Callable[[], float]


def channel_to_json(channel: Channel) -> dict:
    return {
        "channel_id": channel.channel_id,
        "title": _title_to_json(channel.title),
        "title_candidates": [
            dict(_title_to_json(t), score=score) for t, score in channel.title_candidates
        ],
        "products": [{"id": pid, "score": score} for pid, score in channel.products],
        "status": channel.status.value,
        "created_at": channel.created_at,
    }


def channel_from_json(obj: dict) -> Channel:
    return Channel(
        channel_id=obj["channel_id"],
        title=_title_from_json(obj["title"]),
        title_candidates=[
            (_title_from_json(t), t["score"]) for t in obj["title_candidates"]
        ],
        products=[(p["id"], p["score"]) for p in obj["products"]],
        status=ChannelStatus(obj["status"]),
        created_at=obj["created_at"],
    )


def _title_to_json(title: TopicTitle) -> dict:
    return {"phrase_a": title.phrase_a, "phrase_b": title.phrase_b,
            "source": title.source.value}


def _title_from_json(obj: dict) -> TopicTitle:
    return TopicTitle(obj["phrase_a"], obj["phrase_b"], TopicSource(obj["source"]))


class ChannelStore:
    """Channel versions and review events on a single JSONL log file."""

    def __init__(self, path: str | Path, min_products: int = 3, clock: Clock = time.time):
        self.path = Path(path)
        self.min_products = min_products
        self.clock = clock
        self._lock = threading.Lock()
        self._channels: dict[str, Channel] = {}
        self._decisions: list[dict] = []
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        self._channels = {}
        self._decisions = []
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"corrupt store event on line {lineno}: {exc}") from exc
                self._apply(event, lineno)

    def _apply(self, event: dict, lineno: int | None = None) -> None:
        where = f" (line {lineno})" if lineno else ""
        kind = event.get("type")
        if kind == "channel_created":
            channel = channel_from_json(event["channel"])
            self._channels[channel.channel_id] = channel
        elif kind == "decision":
            cid = event["channel_id"]
            channel = self._channels.get(cid)
            if channel is None:
                raise DataError(f"decision for unknown channel {cid!r}{where}")
            removed = set(event.get("removed_products", []))
            if event["decision"] == "accept":
                channel.products = [(pid, s) for pid, s in channel.products
                                    if pid not in removed]
                channel.status = ChannelStatus.PUBLISHED
            else:
                channel.status = ChannelStatus.REJECTED
            self._decisions.append(event)
        else:
            raise DataError(f"unknown store event type {kind!r}{where}")

    def _append(self, events: Iterable[dict]) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            for event in events:
                fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- queries ------------------------------------------------------------

    def get(self, channel_id: str) -> Channel:
        channel = self._channels.get(channel_id)
        if channel is None:
            raise KeyError(channel_id)
        return channel

    def channels(self, status: ChannelStatus | None = None) -> list[Channel]:
        ordered = sorted(self._channels.values(),
                         key=lambda c: (c.created_at, c.channel_id))
        if status is None:
            return ordered
        return [c for c in ordered if c.status == status]

    def known_ids(self) -> set[str]:
        return set(self._channels)

    def counts(self) -> dict[str, int]:
        out = {status.value: 0 for status in ChannelStatus}
        for channel in self._channels.values():
            out[channel.status.value] += 1
        return out

    # -- mutations ----------------------------------------------------------

    def add_channels(self, channels: Sequence[Channel]) -> int:
        """Append creation events, skipping content-duplicate channel ids."""
        with self._lock:
            fresh = [c for c in channels if c.channel_id not in self._channels]
            events = [{"type": "channel_created", "ts": c.created_at,
                       "channel": channel_to_json(c)} for c in fresh]
            self._append(events)
            for event in events:
                self._apply(event)
            return len(fresh)

    def decide(self, channel_id: str, decision: str, removed_products: Sequence[str],
               reviewer: str) -> Channel:
        """Publish or reject a pending channel exactly once."""
        if decision not in ("accept", "reject"):
            raise ValidationError(f"decision must be accept or reject, got {decision!r}")
        with self._lock:
            channel = self.get(channel_id)
            if channel.status != ChannelStatus.PENDING:
                raise ConflictError(
                    f"channel {channel_id} is already {channel.status.value}")
            if decision == "accept":
                known = {pid for pid, _ in channel.products}
                unknown = [pid for pid in removed_products if pid not in known]
                if unknown:
                    raise ValidationError(
                        f"cannot remove products not in channel: {unknown}")
                remaining = len(known) - len(set(removed_products))
                if remaining < self.min_products:
                    raise ValidationError(
                        f"removal leaves {remaining} products, minimum is {self.min_products}")
            event = {
                "type": "decision",
                "ts": self.clock(),
                "channel_id": channel_id,
                "decision": decision,
                "removed_products": list(removed_products),
                "reviewer": reviewer,
            }
            self._append([event])
            self._apply(event)
            return channel

    # -- cross-process lease -------------------------------------------------

    @contextlib.contextmanager
    def lease(self):
        lock_path = self.path.with_suffix(self.path.suffix + ".lock")
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConflictError(f"store is leased by another run ({lock_path})")
        try:
            os.close(fd)
            yield self
        finally:
            os.unlink(lock_path)

    def export_channels(self, path: str | Path) -> int:
        channels = self.channels()
        with open(path, "w", encoding="utf-8") as fh:
            for channel in channels:
                fh.write(json.dumps(channel_to_json(channel), ensure_ascii=False) + "\n")
        return len(channels)


def acceptance_rate(store: ChannelStore,
                    window: tuple[float, float] | None = None) -> float:
    """Published / (published + rejected) × 100 over reviewed channels."""
    decisions = store._decisions
    if window is not None:
        start, end = window
        decisions = [d for d in decisions if start <= d["ts"] <= end]
    if not decisions:
        raise ValueError("no reviewed channels in the window")
    published = sum(1 for d in decisions if d["decision"] == "accept")
    return 100.0 * published / len(decisions)


def review_decision(store: ChannelStore, channel_id: str, decision: str,
                    removed_products: Sequence[str], reviewer: str) -> Channel:
    return store.decide(channel_id, decision, removed_products, reviewer)
