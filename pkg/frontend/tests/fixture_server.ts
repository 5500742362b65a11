// In-memory stand-in for the review service, faithful to the HTTP contract:
// pagination, exactly-once decisions (409), min_products validation (400),
// and the stats roll-up. Exposed as a fetch-compatible function.

import type { ChannelStatus, ChannelView } from "../src/types.js";
import type { FetchLike } from "../src/api.js";

export interface FixtureOptions {
  minProducts?: number;
  /** Fail every request with a network error while > 0 (decremented). */
  failNextRequests?: number;
}

export class FixtureServer {
  readonly channels = new Map<string, ChannelView>();
  private minProducts: number;
  private failNextRequests: number;
  requestLog: string[] = [];

  constructor(channels: ChannelView[], options: FixtureOptions = {}) {
    for (const channel of channels) {
      this.channels.set(channel.channel_id, structuredClone(channel));
    }
    this.minProducts = options.minProducts ?? 3;
    this.failNextRequests = options.failNextRequests ?? 0;
  }

  failRequests(count: number): void {
    this.failNextRequests = count;
  }

  fetch: FetchLike = async (input, init) => {
    this.requestLog.push(`${init?.method ?? "GET"} ${input}`);
    if (this.failNextRequests > 0) {
      this.failNextRequests -= 1;
      throw new TypeError("NetworkError: fixture connection refused");
    }
    const url = new URL(input, "http://fixture");
    const path = url.pathname;

    if (path === "/api/stats") {
      return json(200, this.stats());
    }
    if (path === "/api/channels") {
      return json(200, this.list(url));
    }
    const decisionMatch = path.match(/^\/api\/channels\/([^/]+)\/decision$/);
    if (decisionMatch && init?.method === "POST") {
      return this.decide(decisionMatch[1], JSON.parse(String(init.body)));
    }
    const getMatch = path.match(/^\/api\/channels\/([^/]+)$/);
    if (getMatch) {
      const channel = this.channels.get(getMatch[1]);
      return channel ? json(200, channel) : json(404, { detail: "no such channel" });
    }
    return json(404, { detail: `unknown path ${path}` });
  };

  private list(url: URL) {
    const status = url.searchParams.get("status") as ChannelStatus | null;
    const page = Number(url.searchParams.get("page") ?? "1");
    const pageSize = Number(url.searchParams.get("page_size") ?? "10");
    const all = [...this.channels.values()]
      .filter((c) => !status || c.status === status)
      .sort((a, b) => a.created_at - b.created_at || a.channel_id.localeCompare(b.channel_id));
    const start = (page - 1) * pageSize;
    return {
      channels: all.slice(start, start + pageSize),
      page,
      page_size: pageSize,
      total: all.length,
      pages: Math.max(1, Math.ceil(all.length / pageSize)),
    };
  }

  private decide(channelId: string, body: { decision: string; removed_products: string[] }) {
    const channel = this.channels.get(channelId);
    if (!channel) return json(404, { detail: "no such channel" });
    if (channel.status !== "pending") {
      return json(409, { detail: `channel is already ${channel.status}` });
    }
    if (body.decision === "accept") {
      const remaining = channel.products.length - new Set(body.removed_products).size;
      if (remaining < this.minProducts) {
        return json(400, {
          detail: `removal leaves ${remaining} products, minimum is ${this.minProducts}`,
        });
      }
      channel.products = channel.products.filter(
        (p) => !body.removed_products.includes(p.id),
      );
      channel.status = "published";
    } else if (body.decision === "reject") {
      channel.status = "rejected";
    } else {
      return json(400, { detail: `bad decision ${body.decision}` });
    }
    return json(200, channel);
  }

  private stats() {
    let pending = 0;
    let published = 0;
    let rejected = 0;
    for (const channel of this.channels.values()) {
      if (channel.status === "pending") pending += 1;
      else if (channel.status === "published") published += 1;
      else rejected += 1;
    }
    const reviewed = published + rejected;
    return {
      pending,
      published,
      rejected,
      acceptance_rate: reviewed === 0 ? null : (100 * published) / reviewed,
    };
  }
}

function json(status: number, body: unknown): Promise<Response> {
  return Promise.resolve(
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    }),
  );
}

export function makeChannel(id: string, n: number, createdAt: number): ChannelView {
  const title = { phrase_a: `场景主题${id}`, phrase_b: "精选好物推荐", source: "generated" };
  return {
    channel_id: id,
    title,
    title_candidates: [{ ...title, score: 0.91 }],
    products: Array.from({ length: n }, (_, i) => ({ id: `${id}-p${i}`, score: 0.8 })),
    status: "pending",
    created_at: createdAt,
  };
}
