// Class-progress dashboard: grouped SVG bars, one group per phoneme class,
// one bar per learner within the group, success rate (or attempt count) on
// the value axis.  Pure string rendering so it is testable without a DOM.

import { escapeHtml } from '../html';
import { PHONEME_CLASSES, type ClassStatsRow, type PhonemeClass } from '../types';

export type DashboardMetric = 'success_rate' | 'attempts';

export interface DashboardOptions {
    width?: number;
    height?: number;
    title?: string;
}

const LEARNER_PALETTE = ['#4e79a7', '#f28e2b', '#59a14f', '#e15759', '#b07aa1', '#76b7b2'];

const MARGIN = { top: 36, right: 16, bottom: 52, left: 48 };

function defaultTitle(metric: DashboardMetric): string {
    return metric === 'success_rate'
        ? 'Pronunciation acceptance rate by phoneme class'
        : 'Attempts by phoneme class';
}

export function renderClassDashboard(
    rows: ClassStatsRow[],
    metric: DashboardMetric = 'success_rate',
    options: DashboardOptions = {},
): string {
    const width = options.width ?? 640;
    const height = options.height ?? 320;
    const title = options.title ?? defaultTitle(metric);
    const open = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
        `class="class-dashboard" role="img" aria-label="${escapeHtml(title)}">`;
    const titleText = `<text x="${width / 2}" y="20" text-anchor="middle" class="chart-title">` +
        `${escapeHtml(title)}</text>`;

    if (rows.length === 0) {
        return `${open}${titleText}<text x="${width / 2}" y="${height / 2}" ` +
            `text-anchor="middle" class="placeholder">no attempts yet</text></svg>`;
    }

    const classes = PHONEME_CLASSES.filter((cls) => rows.some((row) => row.class === cls));
    const learners = [...new Set(rows.map((row) => row.learner_id))].sort();
    const byKey = new Map<string, ClassStatsRow>();
    for (const row of rows) byKey.set(`${row.learner_id}|${row.class}`, row);

    const valueOf = (row: ClassStatsRow): number =>
        metric === 'success_rate' ? row.success_rate : row.attempts;
    const scaleMax = metric === 'success_rate'
        ? 100
        : Math.max(5, Math.ceil(Math.max(...rows.map(valueOf)) / 5) * 5);

    const plotWidth = width - MARGIN.left - MARGIN.right;
    const plotHeight = height - MARGIN.top - MARGIN.bottom;
    const baseline = MARGIN.top + plotHeight;
    const groupWidth = plotWidth / classes.length;
    const barWidth = Math.min(28, (groupWidth * 0.8) / learners.length);

    const parts: string[] = [open, titleText];

    const tickCount = 4;
    for (let t = 0; t <= tickCount; t++) {
        const value = (scaleMax * t) / tickCount;
        const y = baseline - (value / scaleMax) * plotHeight;
        parts.push(
            `<line x1="${MARGIN.left}" y1="${y}" x2="${width - MARGIN.right}" y2="${y}" class="gridline"/>`,
            `<text x="${MARGIN.left - 6}" y="${y + 4}" text-anchor="end" class="tick">` +
                `${metric === 'success_rate' ? value.toFixed(0) : value}</text>`,
        );
    }
    const axisLabel = metric === 'success_rate' ? 'success rate (%)' : 'attempts';
    parts.push(
        `<text x="14" y="${MARGIN.top + plotHeight / 2}" class="axis-label" text-anchor="middle" ` +
            `transform="rotate(-90 14 ${MARGIN.top + plotHeight / 2})">${axisLabel}</text>`,
    );

    classes.forEach((cls: PhonemeClass, groupIndex) => {
        const groupLeft = MARGIN.left + groupIndex * groupWidth;
        const groupCenter = groupLeft + groupWidth / 2;
        const rowStart = groupCenter - (barWidth * learners.length) / 2;
        learners.forEach((learner, learnerIndex) => {
            const row = byKey.get(`${learner}|${cls}`);
            if (!row) return;
            const value = valueOf(row);
            const barHeight = (value / scaleMax) * plotHeight;
            const x = rowStart + learnerIndex * barWidth;
            const fill = LEARNER_PALETTE[learnerIndex % LEARNER_PALETTE.length];
            parts.push(
                `<rect x="${x}" y="${baseline - barHeight}" width="${barWidth}" ` +
                    `height="${barHeight}" fill="${fill}" class="bar" ` +
                    `data-class="${cls}" data-learner="${escapeHtml(learner)}" ` +
                    `data-value="${value}"/>`,
            );
        });
        parts.push(
            `<text x="${groupCenter}" y="${baseline + 18}" text-anchor="middle" class="group-label">` +
                `${cls}</text>`,
        );
    });

    learners.forEach((learner, learnerIndex) => {
        const x = MARGIN.left + learnerIndex * 140;
        const y = height - 14;
        const fill = LEARNER_PALETTE[learnerIndex % LEARNER_PALETTE.length];
        parts.push(
            `<rect x="${x}" y="${y - 10}" width="12" height="12" fill="${fill}" class="legend-swatch"/>`,
            `<text x="${x + 18}" y="${y}" class="legend-label">${escapeHtml(learner)}</text>`,
        );
    });

    parts.push('</svg>');
    return parts.join('');
}
