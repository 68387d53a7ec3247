// Client-side audio conditioning: whatever rate the browser captures at,
// attempts are uploaded as 16 kHz / 16-bit / mono PCM WAV — the only format
// the service accepts.

export const TARGET_SAMPLE_RATE = 16000;

export function concatChunks(chunks: Float32Array[]): Float32Array {
    let total = 0;
    for (const chunk of chunks) total += chunk.length;
    const joined = new Float32Array(total);
    let offset = 0;
    for (const chunk of chunks) {
        joined.set(chunk, offset);
        offset += chunk.length;
    }
    return joined;
}

export function resampleLinear(
    samples: Float32Array,
    sourceRate: number,
    targetRate: number = TARGET_SAMPLE_RATE,
): Float32Array {
    if (sourceRate <= 0 || targetRate <= 0) {
        throw new Error(`sample rates must be positive, got ${sourceRate} -> ${targetRate}`);
    }
    if (sourceRate === targetRate) return new Float32Array(samples);
    if (samples.length === 0) return new Float32Array(0);
    const outLength = Math.max(1, Math.floor((samples.length * targetRate) / sourceRate));
    const out = new Float32Array(outLength);
    const step = sourceRate / targetRate;
    for (let i = 0; i < outLength; i++) {
        const position = i * step;
        const left = Math.min(samples.length - 1, Math.floor(position));
        const right = Math.min(samples.length - 1, left + 1);
        const frac = position - left;
        out[i] = samples[left] + (samples[right] - samples[left]) * frac;
    }
    return out;
}

export function floatToInt16(samples: Float32Array): Int16Array {
    const out = new Int16Array(samples.length);
    for (let i = 0; i < samples.length; i++) {
        const clamped = Math.max(-1, Math.min(1, samples[i]));
        out[i] = Math.round(clamped * 32767);
    }
    return out;
}

function writeAscii(view: DataView, offset: number, text: string): void {
    for (let i = 0; i < text.length; i++) {
        view.setUint8(offset + i, text.charCodeAt(i));
    }
}

export function encodeWavPcm16Mono(
    samples: Int16Array,
    sampleRate: number = TARGET_SAMPLE_RATE,
): Uint8Array {
    const dataBytes = samples.length * 2;
    const buffer = new ArrayBuffer(44 + dataBytes);
    const view = new DataView(buffer);
    writeAscii(view, 0, 'RIFF');
    view.setUint32(4, 36 + dataBytes, true);
    writeAscii(view, 8, 'WAVE');
    writeAscii(view, 12, 'fmt ');
    view.setUint32(16, 16, true);
    view.setUint16(20, 1, true);            // PCM
    view.setUint16(22, 1, true);            // mono
    view.setUint32(24, sampleRate, true);
    view.setUint32(28, sampleRate * 2, true); // byte rate
    view.setUint16(32, 2, true);            // block align
    view.setUint16(34, 16, true);           // bits per sample
    writeAscii(view, 36, 'data');
    view.setUint32(40, dataBytes, true);
    for (let i = 0; i < samples.length; i++) {
        view.setInt16(44 + i * 2, samples[i], true);
    }
    return new Uint8Array(buffer);
}

// One-stop conversion from a capture (ScriptProcessor chunks at the
// AudioContext's native rate) to an uploadable WAV body.
export function captureToWav(chunks: Float32Array[], sourceRate: number): Uint8Array {
    const joined = concatChunks(chunks);
    const resampled = resampleLinear(joined, sourceRate);
    return encodeWavPcm16Mono(floatToInt16(resampled));
}
