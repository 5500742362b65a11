"""HTTP review API consumed by the screening frontend.

Read endpoints page through channels by status; the decision endpoint is the
single mutation path and enforces the exactly-once transition rule. When a
static assets directory is provided the app also serves the reviewer UI.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .errors import ConflictError, ValidationError
from .qc import Channel, ChannelStatus
from .store import ChannelStore, channel_to_json

DEFAULT_PAGE_SIZE = 10


class DecisionRequest(BaseModel):
    decision: str
    removed_products: list[str] = Field(default_factory=list)
    reviewer: str


def _channel_view(channel: Channel) -> dict:
    return channel_to_json(channel)


def create_app(store: ChannelStore, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="channel review service")

    @app.get("/api/channels")
    def list_channels(status: str | None = Query(default=None),
                      page: int = Query(default=1, ge=1),
                      page_size: int = Query(default=DEFAULT_PAGE_SIZE, ge=1, le=100)):
        try:
            status_filter = ChannelStatus(status) if status else None
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown status {status!r}")
        channels = store.channels(status_filter)
        total = len(channels)
        pages = max(1, -(-total // page_size))
        start = (page - 1) * page_size
        return {
            "channels": [_channel_view(c) for c in channels[start:start + page_size]],
            "page": page,
            "page_size": page_size,
            "total": total,
            "pages": pages,
        }

    @app.get("/api/channels/{channel_id}")
    def get_channel(channel_id: str):
        try:
            return _channel_view(store.get(channel_id))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no channel {channel_id!r}")

    @app.post("/api/channels/{channel_id}/decision")
    def decide(channel_id: str, request: DecisionRequest):
        try:
            channel = store.decide(channel_id, request.decision,
                                   request.removed_products, request.reviewer)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no channel {channel_id!r}")
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _channel_view(channel)

    @app.get("/api/stats")
    def stats():
        counts = store.counts()
        reviewed = counts["published"] + counts["rejected"]
        rate = 100.0 * counts["published"] / reviewed if reviewed else None
        return {
            "pending": counts["pending"],
            "published": counts["published"],
            "rejected": counts["rejected"],
            "acceptance_rate": rate,
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
