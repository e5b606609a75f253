/** Payload shapes of the session API (mirrors the server exactly). */

export interface Box {
  left: number;
  top: number;
  width: number;
  height: number;
}

/** One solicited instance with the model's suggestion and uncertainty. */
export interface QueryView {
  instance_id: string;
  n: number;
  boxes_t: number[][];
  boxes_t1: number[][];
  suggested: number[];
  confidence: number[][];
  value_scores: number[];
}

export interface SessionState {
  round: number;
  n_labeled: number;
  n_pool: number;
  hamming_rate_history: number[];
  done: boolean;
  strategy: string;
}

export interface LabelReply {
  accepted: boolean;
  next_round: number;
  done: boolean;
}

export function toBox(raw: number[]): Box {
  return { left: raw[0], top: raw[1], width: raw[2], height: raw[3] };
}
