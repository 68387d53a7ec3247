// Teacher console: author word lists (class labels previewed per word),
// grant or deny individual words, and review learner statistics.  Only
// granted words enter learner sessions — the service snapshots grants at
// session creation.

import { escapeHtml } from '../html';
import { LEVELS, type LearnerStats, type Level, type WordlistDoc } from '../types';
import { renderClassDashboard } from './dashboard';

export interface WordlistDraft {
    name: string;
    level: Level;
    text: string;
}

export function draftWords(draft: WordlistDraft): string[] {
    return draft.text
        .split('\n')
        .map((line) => line.trim())
        .filter((line) => line.length > 0);
}

export function grantedIndices(wordlist: WordlistDoc): number[] {
    return wordlist.words
        .map((entry, index) => (entry.granted ? index : -1))
        .filter((index) => index >= 0);
}

export function renderLevelSelect(selected: Level): string {
    const options = LEVELS.map(
        (level) =>
            `<option value="${level}"${level === selected ? ' selected' : ''}>${level}</option>`,
    ).join('');
    return `<select id="wordlist-level" data-field="level">${options}</select>`;
}

export function renderWordlistEditor(
    wordlist: WordlistDoc | null,
    draft: WordlistDraft,
): string {
    const parts: string[] = ['<section class="teacher-panel">'];
    parts.push(
        '<h2>Word lists</h2>',
        '<div class="wordlist-form">',
        `<input id="wordlist-name" data-field="name" placeholder="list name" ` +
            `value="${escapeHtml(draft.name)}"/>`,
        renderLevelSelect(draft.level),
        `<textarea id="wordlist-words" data-field="words" ` +
            `placeholder="one diacritized word per line" dir="rtl" lang="ar">` +
            `${escapeHtml(draft.text)}</textarea>`,
        '<button data-action="create-wordlist">Create word list</button>',
        '</div>',
    );
    if (wordlist) {
        const rows = wordlist.words
            .map((entry, index) => {
                const checked = entry.granted ? ' checked' : '';
                return (
                    '<tr>' +
                    `<td dir="rtl" lang="ar">${escapeHtml(entry.word)}</td>` +
                    `<td><span class="class-chip class-${entry.class}">${entry.class}</span></td>` +
                    `<td class="phonemes">${escapeHtml(entry.phonemes.join(' '))}</td>` +
                    `<td><label><input type="checkbox" data-action="toggle-grant" ` +
                    `data-index="${index}"${checked}/> granted</label></td>` +
                    '</tr>'
                );
            })
            .join('');
        parts.push(
            `<h3>${escapeHtml(wordlist.name || wordlist.wordlist_id)} ` +
                `<small>(level ${wordlist.level})</small></h3>`,
            '<table class="wordlist-table">',
            '<thead><tr><th>word</th><th>class</th><th>phonemes</th><th>grant</th></tr></thead>',
            `<tbody>${rows}</tbody>`,
            '</table>',
            '<button data-action="save-grants">Save grants</button>',
        );
    }
    parts.push('</section>');
    return parts.join('');
}

export function renderStatsPanel(stats: LearnerStats | null): string {
    if (!stats) {
        return '<section class="stats-panel"><p class="hint">Pick a learner to see progress.</p></section>';
    }
    const levelRows = stats.levels
        .map(
            (row) =>
                `<tr><td>${escapeHtml(row.level)}</td><td>${row.attempts}</td>` +
                `<td>${row.accepted}</td><td>${row.success_rate.toFixed(1)}%</td></tr>`,
        )
        .join('');
    const levelTable = stats.levels.length
        ? `<table class="level-table">` +
          `<thead><tr><th>level</th><th>attempts</th><th>accepted</th><th>success</th></tr></thead>` +
          `<tbody>${levelRows}</tbody></table>`
        : '';
    return (
        `<section class="stats-panel">` +
        `<h2>Progress — ${escapeHtml(stats.learner_id)}</h2>` +
        renderClassDashboard(stats.classes) +
        levelTable +
        `</section>`
    );
}
