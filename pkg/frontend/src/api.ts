import type {
  ChannelListResponse,
  ChannelStatus,
  ChannelView,
  DecisionRequest,
  StatsResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

/** The channel was already decided by someone else (HTTP 409). */
export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, message);
    this.name = "ConflictError";
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let detail = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (response.status === 409) throw new ConflictError(detail);
  throw new ApiError(response.status, detail);
}

export class ReviewApi {
  constructor(
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    private readonly base: string = "",
  ) {}

  async listChannels(
    status: ChannelStatus | null,
    page: number,
    pageSize: number,
  ): Promise<ChannelListResponse> {
    const params = new URLSearchParams({ page: String(page), page_size: String(pageSize) });
    if (status) params.set("status", status);
    const response = await this.fetchImpl(`${this.base}/api/channels?${params}`);
    await raiseForStatus(response);
    return response.json();
  }

  async getChannel(channelId: string): Promise<ChannelView> {
    const response = await this.fetchImpl(`${this.base}/api/channels/${channelId}`);
    await raiseForStatus(response);
    return response.json();
  }

  async decide(channelId: string, request: DecisionRequest): Promise<ChannelView> {
    const response = await this.fetchImpl(`${this.base}/api/channels/${channelId}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    await raiseForStatus(response);
    return response.json();
  }

  async getStats(): Promise<StatsResponse> {
    const response = await this.fetchImpl(`${this.base}/api/stats`);
    await raiseForStatus(response);
    return response.json();
  }
}
