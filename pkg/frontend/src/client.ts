/**
 * Session client: a thin, protocol-free pipe to the experiment server.
 *
 * The client never decides what comes next; it renders whatever
 * /current or a POST response says.  Third presentations, ordering and
 * completion are entirely the server's business.  What the client does
 * own: response-time measurement (render-complete to click), a
 * single-submission guard against double clicks, and a retry queue that
 * resends the same presentation id on network failure (safe because the
 * server replays duplicates idempotently).
 */

import type {
  ChoiceBody,
  ComparingPayload,
  QuestionnaireBody,
  SessionPayload,
} from "./types.js";

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export interface SessionClientOptions {
  baseUrl: string;
  sessionId: string;
  fetchFn?: FetchLike;
  /** monotonic clock in seconds */
  now?: () => number;
  /** network-failure retries per submission */
  maxRetries?: number;
  /** sleep between retries, injectable for tests */
  sleep?: (ms: number) => Promise<void>;
  retryDelayMs?: number;
}

export class HttpError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class SessionClient {
  private readonly baseUrl: string;
  private readonly sessionId: string;
  private readonly fetchFn: FetchLike;
  private readonly now: () => number;
  private readonly maxRetries: number;
  private readonly sleep: (ms: number) => Promise<void>;
  private readonly retryDelayMs: number;

  private current: SessionPayload | null = null;
  private renderCompleteAt: number | null = null;
  private inFlight: Promise<SessionPayload> | null = null;
  private inFlightPresentation: string | null = null;

  constructor(options: SessionClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, "");
    this.sessionId = options.sessionId;
    this.fetchFn = options.fetchFn ?? (fetch as unknown as FetchLike);
    this.now = options.now ?? (() => performance.now() / 1000);
    this.maxRetries = options.maxRetries ?? 5;
    this.sleep = options.sleep ?? ((ms) => new Promise((r) => setTimeout(r, ms)));
    this.retryDelayMs = options.retryDelayMs ?? 1000;
  }

  get payload(): SessionPayload | null {
    return this.current;
  }

  private async request(path: string, body?: unknown): Promise<SessionPayload> {
    let lastError: unknown;
    for (let attempt = 0; attempt <= this.maxRetries; attempt++) {
      if (attempt > 0) {
        await this.sleep(this.retryDelayMs);
      }
      try {
        const response = await this.fetchFn(`${this.baseUrl}${path}`, body === undefined
          ? undefined
          : {
              method: "POST",
              headers: { "content-type": "application/json" },
              body: JSON.stringify(body),
            });
        if (!response.ok) {
          throw new HttpError(response.status, `${path} -> ${response.status}`);
        }
        return (await response.json()) as SessionPayload;
      } catch (error) {
        if (error instanceof HttpError) {
          throw error; // the server spoke; do not blind-retry protocol errors
        }
        lastError = error; // network failure: retry the identical body
      }
    }
    throw lastError instanceof Error ? lastError : new Error(String(lastError));
  }

  /** Fetch the server's current view; safe at boot and after refresh. */
  async refresh(): Promise<SessionPayload> {
    this.current = await this.request(`/sessions/${this.sessionId}/current`);
    this.renderCompleteAt = null;
    return this.current;
  }

  /**
   * The app calls this once both viewports have finished loading their
   * meshes; response-time measurement starts here, not at payload time.
   */
  markRenderComplete(): void {
    this.renderCompleteAt = this.now();
  }

  get canChoose(): boolean {
    return (
      this.current?.phase === "comparing" &&
      this.renderCompleteAt !== null &&
      this.inFlight === null
    );
  }

  /**
   * Post a forced choice for the current presentation.  A second click
   * while the first is in flight joins the same submission instead of
   * posting twice.
   */
  choose(chosenId: string): Promise<SessionPayload> {
    const payload = this.current;
    if (payload === null || payload.phase !== "comparing") {
      return Promise.reject(new Error("no active presentation"));
    }
    if (this.renderCompleteAt === null) {
      return Promise.reject(new Error("meshes still loading; choice not recordable"));
    }
    if (this.inFlight !== null && this.inFlightPresentation === payload.presentation_id) {
      return this.inFlight;
    }
    const body: ChoiceBody = {
      presentation_id: payload.presentation_id,
      chosen_id: chosenId,
      response_time: Math.max(0, this.now() - this.renderCompleteAt),
    };
    this.inFlightPresentation = payload.presentation_id;
    this.inFlight = this.request(`/sessions/${this.sessionId}/choices`, body)
      .then((next) => {
        this.current = next;
        this.renderCompleteAt = null;
        return next;
      })
      .finally(() => {
        this.inFlight = null;
        this.inFlightPresentation = null;
      });
    return this.inFlight;
  }

  async submitQuestionnaire(body: QuestionnaireBody): Promise<SessionPayload> {
    const next = await this.request(`/sessions/${this.sessionId}/questionnaire`, body);
    this.current = next;
    return next;
  }
}

export function isComparing(payload: SessionPayload | null): payload is ComparingPayload {
  return payload?.phase === "comparing";
}
