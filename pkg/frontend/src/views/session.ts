// Learner practice loop: show the current word, record an attempt, render the
// verdict with flagged letters stressed, and honor the service's next_action
// (the Advance control is disabled while a repeat is required).

import { escapeHtml } from '../html';
import { renderWordHighlight } from '../highlight';
import type { AttemptResponse, SessionView } from '../types';

export type RecordingPhase = 'idle' | 'recording' | 'submitting';

export interface SessionPanelState {
    session: SessionView | null;
    phase: RecordingPhase;
    lastFeedback: AttemptResponse | null;
    error: string | null;
}

export function initialSessionState(): SessionPanelState {
    return { session: null, phase: 'idle', lastFeedback: null, error: null };
}

function feedbackForCurrentWord(state: SessionPanelState): AttemptResponse | null {
    const { session, lastFeedback } = state;
    if (!session || !lastFeedback || !session.current_word) return null;
    return lastFeedback.word_index === session.current_word.word_index ? lastFeedback : null;
}

export function advanceAllowed(state: SessionPanelState): boolean {
    if (!state.session || state.session.complete) return false;
    if (state.phase !== 'idle') return false;
    const feedback = feedbackForCurrentWord(state);
    return !(feedback && feedback.next_action === 'RepeatRequired');
}

export function recordLabel(phase: RecordingPhase): string {
    if (phase === 'recording') return 'Stop';
    if (phase === 'submitting') return 'Scoring…';
    return 'Record';
}

// Maps a per-phoneme z-score onto a 0–100% bar; z of −4 or worse bottoms out,
// z of +2 or better fills the bar.
export function scoreBarPercent(normalizedScore: number): number {
    const percent = ((normalizedScore + 4) / 6) * 100;
    return Math.max(2, Math.min(100, percent));
}

function renderFeedback(feedback: AttemptResponse): string {
    const verdictClass = `verdict-${feedback.verdict.toLowerCase()}`;
    const bars = feedback.per_phoneme
        .map((score) => {
            const width = scoreBarPercent(score.normalized_score).toFixed(1);
            const flagged = score.flagged ? ' flagged' : '';
            return (
                `<div class="score-row">` +
                `<span class="score-phoneme">${escapeHtml(score.phoneme)}</span>` +
                `<div class="score-track"><div class="score-bar${flagged}" style="width:${width}%" ` +
                `data-z="${score.normalized_score}"></div></div>` +
                `<span class="score-value">${score.normalized_score.toFixed(2)}</span>` +
                `</div>`
            );
        })
        .join('');
    return (
        `<div class="feedback ${verdictClass}">` +
        `<p class="verdict">${feedback.verdict}</p>` +
        `<p class="message">${escapeHtml(feedback.message)}</p>` +
        `<div class="score-bars">${bars}</div>` +
        `<p class="next-action" data-next-action="${feedback.next_action}">` +
        `${feedback.next_action === 'RepeatRequired' ? 'Please repeat this word.' :
            feedback.next_action === 'OfferRepeat' ? 'You may repeat or move on.' :
            'Great — move to the next word.'}</p>` +
        `</div>`
    );
}

export class LearnerSessionPanel {
    state: SessionPanelState;

    constructor(state: SessionPanelState = initialSessionState()) {
        this.state = state;
    }

    render(): string {
        const { session, phase, error } = this.state;
        const parts: string[] = ['<section class="session-panel">'];
        if (error) {
            parts.push(
                `<div class="banner error">${escapeHtml(error)} ` +
                `<button data-action="retry">Try again</button></div>`,
            );
        }
        if (!session) {
            parts.push('<p class="hint">No session yet — ask your teacher to start one.</p>');
            parts.push('</section>');
            return parts.join('');
        }
        if (session.complete) {
            parts.push('<p class="done">Session complete — well done!</p>');
        } else {
            const word = session.current_word!;
            const feedback = feedbackForCurrentWord(this.state);
            const wordHtml = feedback
                ? renderWordHighlight(word.word, feedback.per_phoneme)
                : `<span class="word-highlight" dir="rtl" lang="ar">${escapeHtml(word.word)}</span>`;
            parts.push(
                `<div class="current-word">${wordHtml}</div>`,
                `<p class="word-meta">level ${word.level} · class ${word.class} · ` +
                    `word ${session.cursor + 1} of ${session.word_count}</p>`,
                `<div class="controls">` +
                    `<button data-action="record"${phase === 'submitting' ? ' disabled' : ''}>` +
                    `${recordLabel(phase)}</button>` +
                    `<button data-action="advance"${advanceAllowed(this.state) ? '' : ' disabled'}>` +
                    `Advance</button>` +
                    `</div>`,
            );
            if (feedback) parts.push(renderFeedback(feedback));
        }
        if (session.attempts.length > 0) {
            const items = session.attempts
                .map((a) => `<li><span dir="rtl" lang="ar">${escapeHtml(a.word)}</span> — ${a.verdict}</li>`)
                .join('');
            parts.push(`<ol class="attempt-history">${items}</ol>`);
        }
        parts.push('</section>');
        return parts.join('');
    }
}
