// Mirrors of the review API JSON bodies. The UI renders these verbatim and
// holds no derived business state.

export type ChannelStatus = "pending" | "published" | "rejected";

export interface TitleView {
  phrase_a: string;
  phrase_b: string;
  source: string;
}

export interface CandidateView extends TitleView {
  score: number;
}

export interface ProductView {
  id: string;
  score: number;
}

export interface ChannelView {
  channel_id: string;
  title: TitleView;
  title_candidates: CandidateView[];
  products: ProductView[];
  status: ChannelStatus;
  created_at: number;
}

export interface ChannelListResponse {
  channels: ChannelView[];
  page: number;
  page_size: number;
  total: number;
  pages: number;
}

export interface StatsResponse {
  pending: number;
  published: number;
  rejected: number;
  acceptance_rate: number | null;
}

export interface DecisionRequest {
  decision: "accept" | "reject";
  removed_products: string[];
  reviewer: string;
}

export function titleText(title: TitleView): string {
  return title.phrase_b ? `${title.phrase_a} @ ${title.phrase_b}` : title.phrase_a;
}
