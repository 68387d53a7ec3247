// Mirrors of the pronunciation service's JSON payloads.  The console performs
// no scoring of its own: every number it displays originates in these shapes.

export type Level = 'A1' | 'A2' | 'B1';

export const LEVELS: readonly Level[] = ['A1', 'A2', 'B1'];

export type PhonemeClass = 'LSVG' | 'WUS' | 'SEOL' | 'MFH' | 'EL' | 'US';

// Canonical display order for class-keyed charts and tables.
export const PHONEME_CLASSES: readonly PhonemeClass[] = [
    'LSVG', 'WUS', 'SEOL', 'MFH', 'EL', 'US',
];

export type Verdict = 'Accepted' | 'Faulty' | 'Rejected';

export type NextAction = 'Advance' | 'OfferRepeat' | 'RepeatRequired';

export interface LearnerDoc {
    learner_id: string;
    name: string;
    created_at: string;
}

export interface WordEntry {
    word: string;
    level: Level;
    phonemes: string[];
    class: PhonemeClass;
    // Per-phoneme [start, end) character ranges into `word`, for highlighting.
    spans: number[][];
    granted: boolean;
}

export interface WordlistDoc {
    wordlist_id: string;
    name: string;
    level: Level;
    words: WordEntry[];
    created_at: string;
}

export interface GrantChange {
    index: number;
    granted: boolean;
}

export interface AttemptSummary {
    word_index: number;
    word: string;
    verdict: Verdict;
    timestamp: string;
}

export interface SessionView {
    session_id: string;
    learner_id: string;
    wordlist_id: string;
    teacher_limit: number;
    cursor: number;
    word_count: number;
    complete: boolean;
    current_word: (WordEntry & { word_index: number }) | null;
    attempts: AttemptSummary[];
}

export interface PhonemeScore {
    phoneme: string;
    normalized_score: number;
    flagged: boolean;
    span: number[];
}

export interface AlignmentSegment {
    phoneme: string;
    start_frame: number;
    end_frame: number;
    log_score: number;
}

export interface AttemptAlignment {
    segments: AlignmentSegment[];
    total_log_score: number;
    frame_count: number;
    bridge_log_score: number;
}

export interface AttemptResponse {
    session_id: string;
    word_index: number;
    word: string;
    level: Level;
    class: PhonemeClass;
    verdict: Verdict;
    message: string;
    per_phoneme: PhonemeScore[];
    faulty_indices: number[];
    next_action: NextAction;
    repeats_so_far: number;
    alignment: AttemptAlignment | null;
}

export interface ClassStatsRow {
    learner_id: string;
    class: PhonemeClass;
    attempts: number;
    accepted: number;
    success_rate: number;
}

export interface LevelStatsRow {
    level: string;
    attempts: number;
    accepted: number;
    success_rate: number;
}

export interface LearnerStats {
    learner_id: string;
    classes: ClassStatsRow[];
    levels: LevelStatsRow[];
}
