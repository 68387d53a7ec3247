// Maps per-phoneme feedback back onto the letters of the Arabic word.  The
// service reports each phoneme with a [start, end) character span into the
// word; a letter is stressed exactly when a flagged phoneme's span covers it,
// so the visible highlights correspond one-to-one with the phoneme flags.
//
// Spans are code-point indices from the service.  Arabic letters and
// diacritics live in the Basic Multilingual Plane, so they coincide with
// JavaScript's UTF-16 string indices here.

import { escapeHtml } from './html';
import type { PhonemeScore } from './types';

export interface HighlightSegment {
    text: string;
    start: number;
    end: number;
    flagged: boolean;
    // Positions (into the per-phoneme list) of every phoneme covering the segment.
    phonemeIndices: number[];
}

type ScoreSpan = Pick<PhonemeScore, 'phoneme' | 'flagged' | 'span'>;

export function buildHighlightSegments(
    word: string,
    perPhoneme: ScoreSpan[],
): HighlightSegment[] {
    const flaggedChars = new Array<boolean>(word.length).fill(false);
    const coverage: number[][] = Array.from({ length: word.length }, () => []);
    perPhoneme.forEach((score, index) => {
        const [start, end] = score.span;
        for (let i = Math.max(0, start); i < Math.min(word.length, end); i++) {
            coverage[i].push(index);
            if (score.flagged) flaggedChars[i] = true;
        }
    });

    const segments: HighlightSegment[] = [];
    let start = 0;
    for (let i = 1; i <= word.length; i++) {
        const boundary =
            i === word.length ||
            flaggedChars[i] !== flaggedChars[start] ||
            coverage[i].join(',') !== coverage[start].join(',');
        if (boundary) {
            segments.push({
                text: word.slice(start, i),
                start,
                end: i,
                flagged: flaggedChars[start],
                phonemeIndices: coverage[start],
            });
            start = i;
        }
    }
    return segments;
}

// The set of character positions that must be visually stressed: the union of
// the flagged phonemes' spans, clipped to the word.
export function flaggedCharPositions(word: string, perPhoneme: ScoreSpan[]): Set<number> {
    const positions = new Set<number>();
    for (const score of perPhoneme) {
        if (!score.flagged) continue;
        const [start, end] = score.span;
        for (let i = Math.max(0, start); i < Math.min(word.length, end); i++) {
            positions.add(i);
        }
    }
    return positions;
}

export function renderWordHighlight(word: string, perPhoneme: ScoreSpan[]): string {
    const parts = buildHighlightSegments(word, perPhoneme).map((segment) => {
        const phonemes = segment.phonemeIndices
            .map((i) => perPhoneme[i].phoneme)
            .join(' ');
        const text = escapeHtml(segment.text);
        if (!segment.flagged) {
            return `<span class="ph" title="${escapeHtml(phonemes)}">${text}</span>`;
        }
        return `<mark class="ph flagged" title="${escapeHtml(phonemes)}">${text}</mark>`;
    });
    return `<span class="word-highlight" dir="rtl" lang="ar">${parts.join('')}</span>`;
}
