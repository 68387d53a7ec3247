// Browser entry point: wires the API client, the microphone recorder, and the
// view renderers onto the page.  All state changes re-render the affected
// section; interaction is handled by event delegation on data-action.

import { AttemptSubmitter, NutqApi, formatApiError } from './api';
import { MicrophonePermissionDenied, MicrophoneRecorder } from './recorder';
import type { Level, SessionView, WordlistDoc } from './types';
import { LearnerSessionPanel, initialSessionState } from './views/session';
import {
    draftWords,
    renderStatsPanel,
    renderWordlistEditor,
    type WordlistDraft,
} from './views/teacher';

const DEFAULT_BASE_URL = 'http://127.0.0.1:8077';

class ConsoleApp {
    private readonly api: NutqApi;
    private readonly submitter: AttemptSubmitter;
    private readonly recorder = new MicrophoneRecorder();
    private readonly panel = new LearnerSessionPanel();

    private wordlist: WordlistDoc | null = null;
    private draft: WordlistDraft = { name: '', level: 'A1', text: '' };
    private learnerId = '';
    private lastWav: Uint8Array | null = null;

    constructor(
        private readonly root: HTMLElement,
        baseUrl: string,
    ) {
        this.api = new NutqApi(baseUrl);
        this.submitter = new AttemptSubmitter(this.api);
    }

    start(): void {
        this.root.innerHTML = [
            '<header class="topbar">',
            '<h1>nutq console</h1>',
            '<span class="topbar-controls">',
            '<input id="learner-id" placeholder="learner id"/>',
            '<button data-action="create-learner">Register learner</button>',
            '<button data-action="start-session">Start session</button>',
            '<button data-action="show-stats">Show stats</button>',
            '</span>',
            '</header>',
            '<div id="banner"></div>',
            '<main class="columns">',
            '<div id="teacher"></div>',
            '<div id="session"></div>',
            '<div id="stats"></div>',
            '</main>',
        ].join('');
        this.root.addEventListener('click', (event) => {
            const target = (event.target as HTMLElement).closest('[data-action]');
            if (target instanceof HTMLElement && target.dataset.action !== 'toggle-grant') {
                void this.dispatch(target.dataset.action!, target);
            }
        });
        this.renderTeacher();
        this.renderSession();
    }

    private banner(text: string): void {
        const el = this.root.querySelector('#banner');
        if (el) el.innerHTML = text ? `<div class="banner error">${text}</div>` : '';
    }

    private readDraft(): void {
        const name = this.root.querySelector<HTMLInputElement>('#wordlist-name');
        const level = this.root.querySelector<HTMLSelectElement>('#wordlist-level');
        const words = this.root.querySelector<HTMLTextAreaElement>('#wordlist-words');
        this.draft = {
            name: name?.value ?? '',
            level: (level?.value as Level) ?? 'A1',
            text: words?.value ?? '',
        };
        const learner = this.root.querySelector<HTMLInputElement>('#learner-id');
        this.learnerId = learner?.value.trim() ?? '';
    }

    private renderTeacher(): void {
        const el = this.root.querySelector('#teacher');
        if (el) el.innerHTML = renderWordlistEditor(this.wordlist, this.draft);
    }

    private renderSession(): void {
        const el = this.root.querySelector('#session');
        if (el) el.innerHTML = this.panel.render();
    }

    private async dispatch(action: string, target: HTMLElement): Promise<void> {
        this.readDraft();
        try {
            switch (action) {
                case 'create-learner': {
                    const doc = await this.api.createLearner(this.learnerId || null, '');
                    const input = this.root.querySelector<HTMLInputElement>('#learner-id');
                    if (input) input.value = doc.learner_id;
                    this.banner('');
                    break;
                }
                case 'create-wordlist': {
                    this.wordlist = await this.api.createWordlist(
                        this.draft.name, this.draft.level, draftWords(this.draft));
                    this.banner('');
                    this.renderTeacher();
                    break;
                }
                case 'save-grants': {
                    if (!this.wordlist) break;
                    const boxes = this.root.querySelectorAll<HTMLInputElement>(
                        'input[data-action="toggle-grant"]');
                    const grants = [...boxes].map((box) => ({
                        index: Number(box.dataset.index), granted: box.checked,
                    }));
                    this.wordlist = await this.api.setGrants(this.wordlist.wordlist_id, grants);
                    this.renderTeacher();
                    break;
                }
                case 'start-session': {
                    if (!this.wordlist || !this.learnerId) {
                        this.banner('create a learner and a word list first');
                        break;
                    }
                    const session = await this.api.createSession(
                        this.learnerId, this.wordlist.wordlist_id);
                    this.panel.state = { ...initialSessionState(), session };
                    this.renderSession();
                    break;
                }
                case 'record':
                    await this.toggleRecording();
                    break;
                case 'advance': {
                    const session = this.requireSession();
                    this.panel.state.session = await this.api.advance(session.session_id);
                    this.panel.state.lastFeedback = null;
                    this.renderSession();
                    break;
                }
                case 'retry':
                    if (this.lastWav) await this.submitWav(this.lastWav);
                    break;
                case 'show-stats': {
                    if (!this.learnerId) break;
                    const stats = await this.api.learnerStats(this.learnerId);
                    const el = this.root.querySelector('#stats');
                    if (el) el.innerHTML = renderStatsPanel(stats);
                    break;
                }
                default:
                    void target;
            }
        } catch (err) {
            this.banner(formatApiError(err));
        }
    }

    private requireSession(): SessionView {
        const session = this.panel.state.session;
        if (!session) throw new Error('no active session');
        return session;
    }

    private async toggleRecording(): Promise<void> {
        if (this.recorder.recording) {
            const capture = await this.recorder.stop();
            this.lastWav = capture.wav;
            await this.submitWav(capture.wav);
            return;
        }
        try {
            await this.recorder.start();
            this.panel.state.phase = 'recording';
            this.panel.state.error = null;
        } catch (err) {
            this.panel.state.error = err instanceof MicrophonePermissionDenied
                ? 'Microphone access is blocked — allow it in the browser and try again.'
                : formatApiError(err);
        }
        this.renderSession();
    }

    private async submitWav(wav: Uint8Array): Promise<void> {
        const session = this.requireSession();
        this.panel.state.phase = 'submitting';
        this.renderSession();
        try {
            const feedback = await this.submitter.submit(session.session_id, wav);
            this.panel.state.lastFeedback = feedback;
            this.panel.state.error = null;
            this.panel.state.session = await this.api.getSession(session.session_id);
        } catch (err) {
            // The submitter keeps its idempotency key, so Try Again cannot
            // double-count the attempt.
            this.panel.state.error = formatApiError(err);
        } finally {
            this.panel.state.phase = 'idle';
            this.renderSession();
        }
    }
}

const root = document.getElementById('app');
if (root) {
    const baseUrl = (window as { NUTQ_API_URL?: string }).NUTQ_API_URL ?? DEFAULT_BASE_URL;
    new ConsoleApp(root, baseUrl).start();
}
