import { ApiError, ConflictError, ReviewApi } from "./api.js";
import type { ChannelStatus, ChannelView, StatsResponse } from "./types.js";

// Mirrors the server's min_products rule for inline validation before
// submit; the server remains authoritative and still rejects with 400.
export const MIN_PRODUCTS = 3;

export interface QueueState {
  filter: ChannelStatus;
  channels: ChannelView[];
  page: number;
  pageSize: number;
  pages: number;
  total: number;
  stats: StatsResponse | null;
  /** Product ids marked for removal, per channel. */
  removals: Map<string, Set<string>>;
  error: string | null;
  notice: string | null;
  loading: boolean;
}

type Listener = (state: QueueState) => void;

/**
 * Controller behind the review queue view. Every displayed value comes from
 * the last API response; a decision optimistically removes the channel from
 * the visible queue and rolls back if the request fails.
 */
export class ReviewQueueStore {
  private state: QueueState = {
    filter: "pending",
    channels: [],
    page: 1,
    pageSize: 10,
    pages: 1,
    total: 0,
    stats: null,
    removals: new Map(),
    error: null,
    notice: null,
    loading: false,
  };
  private listeners: Listener[] = [];

  constructor(
    private readonly api: ReviewApi,
    private readonly reviewer: string,
    private readonly minProducts: number = MIN_PRODUCTS,
  ) {}

  getState(): QueueState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<QueueState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  async load(): Promise<void> {
    this.update({ loading: true, error: null });
    try {
      const [list, stats] = await Promise.all([
        this.api.listChannels(this.state.filter, this.state.page, this.state.pageSize),
        this.api.getStats(),
      ]);
      this.update({
        channels: list.channels,
        page: list.page,
        pageSize: list.page_size,
        pages: list.pages,
        total: list.total,
        stats,
        loading: false,
      });
    } catch (err) {
      this.update({ loading: false, error: describeError(err) });
    }
  }

  async retry(): Promise<void> {
    await this.load();
  }

  async setFilter(filter: ChannelStatus): Promise<void> {
    this.update({ filter, page: 1, notice: null });
    await this.load();
  }

  async setPage(page: number): Promise<void> {
    const clamped = Math.min(Math.max(1, page), this.state.pages);
    this.update({ page: clamped });
    await this.load();
  }

  toggleRemoval(channelId: string, productId: string): void {
    const removals = new Map(this.state.removals);
    const marked = new Set(removals.get(channelId) ?? []);
    if (marked.has(productId)) {
      marked.delete(productId);
    } else {
      marked.add(productId);
    }
    removals.set(channelId, marked);
    this.update({ removals });
  }

  /** Inline mirror of the server rule; null means the removal set is fine. */
  validateRemovals(channel: ChannelView): string | null {
    const marked = this.state.removals.get(channel.channel_id) ?? new Set();
    const remaining = channel.products.length - marked.size;
    if (remaining < this.minProducts) {
      return `removing ${marked.size} products leaves ${remaining}, ` +
        `minimum is ${this.minProducts}`;
    }
    return null;
  }

  async decide(channelId: string, decision: "accept" | "reject"): Promise<boolean> {
    const channel = this.state.channels.find((c) => c.channel_id === channelId);
    if (!channel) return false;
    if (decision === "accept") {
      const message = this.validateRemovals(channel);
      if (message) {
        this.update({ error: message });
        return false;
      }
    }
    const removed = [...(this.state.removals.get(channelId) ?? [])];

    // Optimistic: drop the channel from the visible queue immediately.
    const previous = this.state.channels;
    this.update({
      channels: previous.filter((c) => c.channel_id !== channelId),
      notice: null,
      error: null,
    });
    try {
      await this.api.decide(channelId, {
        decision,
        removed_products: decision === "accept" ? removed : [],
        reviewer: this.reviewer,
      });
      await this.load(); // stats widget refresh + authoritative queue state
      return true;
    } catch (err) {
      if (err instanceof ConflictError) {
        // Someone else decided it first: refresh to the server's truth.
        this.update({ notice: `channel was already decided: ${err.message}` });
        await this.load();
        return false;
      }
      // Roll the optimistic removal back.
      this.update({ channels: previous, error: describeError(err) });
      return false;
    }
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return err.message;
  return String(err);
}
