// In-memory stand-in for the study service, mirroring its observable
// semantics: uniform pair draws with a randomized display side, counters
// that move only when an event is appended, and event-token deduplication.
// Exposes a FetchLike so the client code under test is byte-for-byte the
// code that runs in the browser.

import { FetchLike, Geometry } from "../src/api.js";

export interface FakeWard {
  label: string;
  region: string;
  geometry: Geometry | null;
}

interface FakeJudge {
  id: string;
  familiar_regions: string[];
  comparisons_made: number;
}

export interface RecordedEvent {
  judge_id: string;
  ward_i: string;
  ward_j: string;
  outcome: string;
  event_token: string | null;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function error(status: number, detail: string): Response {
  return json(status, { detail });
}

export class FakeStudyServer {
  judges = new Map<string, FakeJudge>();
  events: RecordedEvent[] = [];
  seenTokens = new Set<string>();
  /** When > 0, that many acknowledgements are dropped after recording. */
  dropAcks = 0;
  private rand: () => number;
  private nextJudge = 0;

  constructor(
    public studyId: string,
    private wards: FakeWard[],
    private targetComparisons = 30,
    seed = 1,
  ) {
    this.rand = mulberry32(seed);
  }

  get fetch(): FetchLike {
    return async (url, init) => this.handle(url, init);
  }

  private familiarWards(judge: FakeJudge): string[] {
    const regions = new Set(judge.familiar_regions);
    return this.wards.filter((w) => regions.has(w.region)).map((w) => w.label);
  }

  private async handle(url: string, init?: RequestInit): Promise<Response> {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const prefix = `/studies/${this.studyId}`;
    if (!path.startsWith(prefix)) return error(404, "unknown study");
    const rest = path.slice(prefix.length);
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : null;

    if (rest === "/judges" && method === "POST") {
      return this.registerJudge(body.familiar_regions as string[]);
    }
    const pairMatch = rest.match(/^\/judges\/([^/]+)\/next-pair$/);
    if (pairMatch && method === "GET") {
      return this.nextPair(pairMatch[1]);
    }
    const judgeMatch = rest.match(/^\/judges\/([^/]+)\/judgements$/);
    if (judgeMatch && method === "POST") {
      return this.recordJudgement(judgeMatch[1], body);
    }
    if (rest === "/wards" && method === "GET") {
      return json(200, {
        labels: this.wards.map((w) => w.label),
        regions: this.wards.map((w) => w.region),
        geojson: {
          type: "FeatureCollection",
          features: this.wards.map((w) => ({
            type: "Feature",
            properties: { name: w.label, region: w.region },
            geometry: w.geometry,
          })),
        },
      });
    }
    if (rest.startsWith("/export") && method === "GET") {
      return json(200, { events: this.events });
    }
    return error(404, `no route for ${method} ${rest}`);
  }

  private registerJudge(familiarRegions: string[]): Response {
    if (!familiarRegions || familiarRegions.length === 0) {
      return error(400, "familiarity set must be non-empty");
    }
    const judge: FakeJudge = {
      id: `judge-${this.nextJudge++}`,
      familiar_regions: familiarRegions,
      comparisons_made: 0,
    };
    this.judges.set(judge.id, judge);
    return json(201, { ...judge, target_comparisons: this.targetComparisons });
  }

  private nextPair(judgeId: string): Response {
    const judge = this.judges.get(judgeId);
    if (!judge) return error(404, `unknown judge '${judgeId}'`);
    const wards = this.familiarWards(judge);
    if (wards.length < 2) return error(409, "fewer than two familiar wards");
    const a = Math.floor(this.rand() * wards.length);
    let b = Math.floor(this.rand() * (wards.length - 1));
    if (b >= a) b += 1;
    const pair = [wards[a], wards[b]].sort();
    const flip = this.rand() < 0.5;
    const [left, right] = flip ? [pair[1], pair[0]] : pair;
    return json(200, {
      ward_left: left,
      ward_right: right,
      comparisons_made: judge.comparisons_made,
      target_comparisons: this.targetComparisons,
    });
  }

  private recordJudgement(
    judgeId: string,
    body: { ward_i: string; ward_j: string; outcome: string; event_token: string | null },
  ): Response {
    const judge = this.judges.get(judgeId);
    if (!judge) return error(404, `unknown judge '${judgeId}'`);
    if (!["i", "j", "tie", "skip"].includes(body.outcome)) {
      return error(400, `bad outcome '${body.outcome}'`);
    }
    const familiar = new Set(this.familiarWards(judge));
    if (!familiar.has(body.ward_i) || !familiar.has(body.ward_j)) {
      return error(400, "ward outside the judge's familiar regions");
    }
    if (body.event_token && this.seenTokens.has(body.event_token)) {
      return json(201, { comparisons_made: judge.comparisons_made, duplicate: true });
    }
    this.events.push({
      judge_id: judgeId,
      ward_i: body.ward_i,
      ward_j: body.ward_j,
      outcome: body.outcome,
      event_token: body.event_token,
    });
    if (body.event_token) this.seenTokens.add(body.event_token);
    judge.comparisons_made += 1;
    if (this.dropAcks > 0) {
      this.dropAcks -= 1;
      throw new TypeError("network connection lost");
    }
    return json(201, { comparisons_made: judge.comparisons_made, duplicate: false });
  }
}
