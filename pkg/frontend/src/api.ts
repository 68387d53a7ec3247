// Thin typed client over the pronunciation service's HTTP/JSON API.  This is
// the console's only channel to the engine — no direct store or model access.

import type {
    AttemptResponse,
    GrantChange,
    LearnerDoc,
    LearnerStats,
    Level,
    SessionView,
    WordlistDoc,
} from './types';

export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly detail: unknown,
    ) {
        super(`API error ${status}`);
        this.name = 'ApiError';
    }
}

export function formatApiError(error: unknown): string {
    if (error instanceof ApiError) {
        if (typeof error.detail === 'string') return error.detail;
        return `request failed (${error.status}): ${JSON.stringify(error.detail)}`;
    }
    if (error instanceof Error) return error.message;
    return String(error);
}

export function newIdempotencyKey(): string {
    if (typeof crypto !== 'undefined' && typeof crypto.randomUUID === 'function') {
        return crypto.randomUUID();
    }
    return `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class NutqApi {
    private readonly fetchFn: FetchLike;

    constructor(
        readonly baseUrl: string,
        fetchFn?: FetchLike,
    ) {
        this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    }

    private async request<T>(
        method: string,
        path: string,
        body?: unknown,
        extraHeaders?: Record<string, string>,
    ): Promise<T> {
        const headers: Record<string, string> = { ...extraHeaders };
        const init: RequestInit = { method, headers };
        if (body instanceof Uint8Array) {
            headers['Content-Type'] = 'application/octet-stream';
            init.body = body as BodyInit;
        } else if (body !== undefined) {
            headers['Content-Type'] = 'application/json';
            init.body = JSON.stringify(body);
        }
        const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
        const text = await response.text();
        let payload: unknown = null;
        if (text) {
            try {
                payload = JSON.parse(text);
            } catch {
                payload = text;
            }
        }
        if (!response.ok) {
            const detail =
                payload !== null && typeof payload === 'object' && 'detail' in payload
                    ? (payload as { detail: unknown }).detail
                    : payload;
            throw new ApiError(response.status, detail);
        }
        return payload as T;
    }

    createLearner(learnerId: string | null, name: string): Promise<LearnerDoc> {
        return this.request('POST', '/learners', { learner_id: learnerId, name });
    }

    learnerStats(learnerId: string): Promise<LearnerStats> {
        return this.request('GET', `/learners/${encodeURIComponent(learnerId)}/stats`);
    }

    createWordlist(name: string, level: Level, words: string[]): Promise<WordlistDoc> {
        return this.request('POST', '/wordlists', { name, level, words });
    }

    getWordlist(wordlistId: string): Promise<WordlistDoc> {
        return this.request('GET', `/wordlists/${encodeURIComponent(wordlistId)}`);
    }

    setGrants(wordlistId: string, grants: GrantChange[]): Promise<WordlistDoc> {
        return this.request('PATCH', `/wordlists/${encodeURIComponent(wordlistId)}`, { grants });
    }

    createSession(
        learnerId: string,
        wordlistId: string,
        teacherLimit?: number,
    ): Promise<SessionView> {
        const body: Record<string, unknown> = {
            learner_id: learnerId,
            wordlist_id: wordlistId,
        };
        if (teacherLimit !== undefined) body.teacher_limit = teacherLimit;
        return this.request('POST', '/sessions', body);
    }

    getSession(sessionId: string): Promise<SessionView> {
        return this.request('GET', `/sessions/${encodeURIComponent(sessionId)}`);
    }

    advance(sessionId: string): Promise<SessionView> {
        return this.request('POST', `/sessions/${encodeURIComponent(sessionId)}/advance`);
    }

    submitAttempt(
        sessionId: string,
        wav: Uint8Array,
        idempotencyKey: string,
    ): Promise<AttemptResponse> {
        return this.request(
            'POST',
            `/sessions/${encodeURIComponent(sessionId)}/attempts`,
            wav,
            { 'Idempotency-Key': idempotencyKey },
        );
    }
}

// Holds the idempotency key across retries: the key is minted when a new
// attempt upload starts and only discarded once the service has answered, so
// resubmitting after a network failure can never double-count the attempt.
export class AttemptSubmitter {
    private key: string | null = null;

    constructor(private readonly api: NutqApi) {}

    get pendingKey(): string | null {
        return this.key;
    }

    async submit(sessionId: string, wav: Uint8Array): Promise<AttemptResponse> {
        if (this.key === null) this.key = newIdempotencyKey();
        const response = await this.api.submitAttempt(sessionId, wav, this.key);
        this.key = null;
        return response;
    }
}
