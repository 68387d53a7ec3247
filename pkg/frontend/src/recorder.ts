// Microphone capture.  The service wants raw PCM, so instead of MediaRecorder
// (which yields compressed webm/opus) we tap the audio graph for Float32
// chunks and convert to 16 kHz WAV on stop.

import { captureToWav, concatChunks } from './audio';

export class MicrophonePermissionDenied extends Error {
    constructor() {
        super('microphone permission was denied');
        this.name = 'MicrophonePermissionDenied';
    }
}

export interface CaptureResult {
    wav: Uint8Array;
    durationSeconds: number;
}

export class MicrophoneRecorder {
    private stream: MediaStream | null = null;
    private context: AudioContext | null = null;
    private source: MediaStreamAudioSourceNode | null = null;
    private processor: ScriptProcessorNode | null = null;
    private chunks: Float32Array[] = [];

    get recording(): boolean {
        return this.processor !== null;
    }

    async start(): Promise<void> {
        if (this.recording) return;
        let stream: MediaStream;
        try {
            stream = await navigator.mediaDevices.getUserMedia({
                audio: { channelCount: 1, echoCancellation: true, noiseSuppression: true },
            });
        } catch (err) {
            if (err instanceof DOMException &&
                (err.name === 'NotAllowedError' || err.name === 'SecurityError')) {
                throw new MicrophonePermissionDenied();
            }
            throw err;
        }
        this.stream = stream;
        this.chunks = [];
        this.context = new AudioContext();
        this.source = this.context.createMediaStreamSource(stream);
        // ScriptProcessorNode needs no separate worklet file and is still the
        // broadest-support way to observe raw samples.
        this.processor = this.context.createScriptProcessor(4096, 1, 1);
        this.processor.onaudioprocess = (event) => {
            this.chunks.push(new Float32Array(event.inputBuffer.getChannelData(0)));
        };
        this.source.connect(this.processor);
        this.processor.connect(this.context.destination);
    }

    async stop(): Promise<CaptureResult> {
        if (!this.context || !this.processor) {
            throw new Error('recorder is not running');
        }
        const sourceRate = this.context.sampleRate;
        this.processor.disconnect();
        this.source?.disconnect();
        this.stream?.getTracks().forEach((track) => track.stop());
        await this.context.close();

        const samples = concatChunks(this.chunks);
        const wav = captureToWav(this.chunks, sourceRate);
        this.stream = null;
        this.context = null;
        this.source = null;
        this.processor = null;
        this.chunks = [];
        return { wav, durationSeconds: samples.length / sourceRate };
    }
}
