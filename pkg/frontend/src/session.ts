// Session state machine for one judge. One decision on screen at a time;
// the counter moves only on server acknowledgement, and every pair
// presentation carries its own idempotency token so a retried submission
// can never record twice.

import {
  Action,
  ApiClient,
  Geometry,
  JudgeView,
  Outcome,
  PairView,
} from "./api.js";

export interface SessionView {
  studyId: string;
  judgeId: string;
  pair: { left: string; right: string } | null;
  geometries: Map<string, Geometry | null>;
  comparisonsMade: number;
  targetComparisons: number;
}

const ACTION_TO_OUTCOME: Record<Action, Outcome> = {
  left: "i",
  right: "j",
  tie: "tie",
  skip: "skip",
};

function defaultToken(): string {
  if (typeof crypto !== "undefined" && crypto.randomUUID) {
    return crypto.randomUUID();
  }
  return `tok-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

export class JudgeSession {
  private pair: PairView | null = null;
  private pairToken = "";
  private comparisonsMade = 0;
  private targetComparisons = 0;
  private geometries = new Map<string, Geometry | null>();
  private busy = false;

  constructor(
    private api: ApiClient,
    private studyId: string,
    private judgeId: string,
    private makeToken: () => string = defaultToken,
  ) {}

  /** Register a fresh judge and start their session. */
  static async join(
    api: ApiClient,
    studyId: string,
    familiarRegions: string[],
    makeToken?: () => string,
  ): Promise<JudgeSession> {
    const judge: JudgeView = await api.registerJudge(studyId, familiarRegions);
    const session = new JudgeSession(api, studyId, judge.id, makeToken);
    await session.start();
    return session;
  }

  /** Resume an existing judge from a stored token; the server restores the counter. */
  static async resume(
    api: ApiClient,
    studyId: string,
    judgeId: string,
    makeToken?: () => string,
  ): Promise<JudgeSession> {
    const session = new JudgeSession(api, studyId, judgeId, makeToken);
    await session.start();
    return session;
  }

  private async start(): Promise<void> {
    const table = await this.api.wards(this.studyId);
    for (const feature of table.geojson.features) {
      this.geometries.set(feature.properties.name, feature.geometry);
    }
    await this.loadNextPair();
  }

  private async loadNextPair(): Promise<void> {
    const pair = await this.api.nextPair(this.studyId, this.judgeId);
    this.pair = pair;
    this.pairToken = this.makeToken();
    this.comparisonsMade = pair.comparisons_made;
    this.targetComparisons = pair.target_comparisons;
  }

  get view(): SessionView {
    return {
      studyId: this.studyId,
      judgeId: this.judgeId,
      pair: this.pair
        ? { left: this.pair.ward_left, right: this.pair.ward_right }
        : null,
      geometries: this.geometries,
      comparisonsMade: this.comparisonsMade,
      targetComparisons: this.targetComparisons,
    };
  }

  get token(): string {
    return this.judgeId;
  }

  get submitting(): boolean {
    return this.busy;
  }

  /**
   * Submit the judgement for the current pair and advance to the next one.
   * Left/right map through the displayed order, so "left" always means the
   * ward the judge saw on the left. Rejected while a submission is in
   * flight; on failure the pair and its token are kept so a retry cannot
   * double-record.
   */
  async submit(action: Action): Promise<void> {
    if (!this.pair) throw new Error("no pair on screen");
    if (this.busy) throw new Error("submission already in flight");
    this.busy = true;
    try {
      const ack = await this.api.submitJudgement(
        this.studyId,
        this.judgeId,
        this.pair.ward_left,
        this.pair.ward_right,
        ACTION_TO_OUTCOME[action],
        this.pairToken,
      );
      this.comparisonsMade = ack.comparisons_made;
      await this.loadNextPair();
    } finally {
      this.busy = false;
    }
  }
}
