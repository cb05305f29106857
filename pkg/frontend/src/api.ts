// Thin typed client for the study service HTTP API. The base URL is the
// only configuration; fetch is injectable so tests can run without a server.

export type Outcome = "i" | "j" | "tie" | "skip";
export type Action = "left" | "right" | "tie" | "skip";

export interface JudgeView {
  id: string;
  familiar_regions: string[];
  comparisons_made: number;
  target_comparisons: number;
}

export interface PairView {
  ward_left: string;
  ward_right: string;
  comparisons_made: number;
  target_comparisons: number;
}

export interface JudgementAck {
  comparisons_made: number;
  duplicate: boolean;
}

export interface WardTable {
  labels: string[];
  regions: string[];
  geojson: {
    type: "FeatureCollection";
    features: Array<{
      type: "Feature";
      properties: { name: string; region: string };
      geometry: Geometry | null;
    }>;
  };
}

export interface Geometry {
  type: string;
  coordinates: unknown;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = await res.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  registerJudge(studyId: string, familiarRegions: string[]): Promise<JudgeView> {
    return this.post(`/studies/${studyId}/judges`, {
      familiar_regions: familiarRegions,
    });
  }

  nextPair(studyId: string, judgeId: string): Promise<PairView> {
    return this.request(`/studies/${studyId}/judges/${judgeId}/next-pair`);
  }

  submitJudgement(
    studyId: string,
    judgeId: string,
    wardI: string,
    wardJ: string,
    outcome: Outcome,
    eventToken: string,
  ): Promise<JudgementAck> {
    return this.post(`/studies/${studyId}/judges/${judgeId}/judgements`, {
      ward_i: wardI,
      ward_j: wardJ,
      outcome,
      event_token: eventToken,
    });
  }

  wards(studyId: string): Promise<WardTable> {
    return this.request(`/studies/${studyId}/wards`);
  }
}
