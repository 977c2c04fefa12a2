/** Framing, FFT, and mel filterbank: the shared signal frontend. */

export function hannWindow(length: number): Float64Array {
  const w = new Float64Array(length);
  for (let i = 0; i < length; i++) {
    w[i] = 0.5 - 0.5 * Math.cos((2 * Math.PI * i) / length);
  }
  return w;
}

export function nextPowerOfTwo(n: number): number {
  let p = 1;
  while (p < n) {
    p *= 2;
  }
  return p;
}

/** In-place iterative radix-2 complex FFT (length must be a power of two). */
export function fft(re: Float64Array, im: Float64Array): void {
  const n = re.length;
  if ((n & (n - 1)) !== 0) {
    throw new Error(`FFT length ${n} is not a power of two`);
  }
  for (let i = 1, j = 0; i < n; i++) {
    let bit = n >> 1;
    for (; j & bit; bit >>= 1) {
      j ^= bit;
    }
    j ^= bit;
    if (i < j) {
      [re[i], re[j]] = [re[j], re[i]];
      [im[i], im[j]] = [im[j], im[i]];
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const angle = (-2 * Math.PI) / len;
    const wRe = Math.cos(angle);
    const wIm = Math.sin(angle);
    for (let start = 0; start < n; start += len) {
      let curRe = 1;
      let curIm = 0;
      for (let k = 0; k < len / 2; k++) {
        const eRe = re[start + k];
        const eIm = im[start + k];
        const oRe = re[start + k + len / 2] * curRe - im[start + k + len / 2] * curIm;
        const oIm = re[start + k + len / 2] * curIm + im[start + k + len / 2] * curRe;
        re[start + k] = eRe + oRe;
        im[start + k] = eIm + oIm;
        re[start + k + len / 2] = eRe - oRe;
        im[start + k + len / 2] = eIm - oIm;
        const nextRe = curRe * wRe - curIm * wIm;
        curIm = curRe * wIm + curIm * wRe;
        curRe = nextRe;
      }
    }
  }
}

/** Power spectrum of one windowed frame, zero-padded to nfft bins. */
export function powerSpectrum(frame: Float64Array, nfft: number): Float64Array {
  const re = new Float64Array(nfft);
  const im = new Float64Array(nfft);
  re.set(frame);
  fft(re, im);
  const half = nfft / 2 + 1;
  const power = new Float64Array(half);
  for (let i = 0; i < half; i++) {
    power[i] = re[i] * re[i] + im[i] * im[i];
  }
  return power;
}

function hzToMel(hz: number): number {
  return 2595 * Math.log10(1 + hz / 700);
}

function melToHz(mel: number): number {
  return 700 * (10 ** (mel / 2595) - 1);
}

/** Triangular mel filterbank over nfft/2+1 power bins; rows are filters. */
export function melFilterbank(
  nBands: number,
  nfft: number,
  sampleRateHz: number,
  fMinHz: number,
  fMaxHz: number,
): Float64Array[] {
  const half = nfft / 2 + 1;
  const melPoints = new Float64Array(nBands + 2);
  const melLo = hzToMel(fMinHz);
  const melHi = hzToMel(fMaxHz);
  for (let i = 0; i < melPoints.length; i++) {
    melPoints[i] = melToHz(melLo + ((melHi - melLo) * i) / (nBands + 1));
  }
  const binHz = sampleRateHz / nfft;
  const bank: Float64Array[] = [];
  for (let b = 0; b < nBands; b++) {
    const filt = new Float64Array(half);
    const lo = melPoints[b];
    const mid = melPoints[b + 1];
    const hi = melPoints[b + 2];
    for (let k = 0; k < half; k++) {
      const f = k * binHz;
      if (f > lo && f < mid) {
        filt[k] = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        filt[k] = (hi - f) / (hi - mid);
      }
    }
    bank.push(filt);
  }
  return bank;
}

export interface FrameSpec {
  frameLength: number;
  hopLength: number;
}

/** Number of frames the analysis produces: floor((n - frame)/hop) + 1. */
export function frameCount(nSamples: number, spec: FrameSpec): number {
  if (nSamples < spec.frameLength) {
    return 0;
  }
  return Math.floor((nSamples - spec.frameLength) / spec.hopLength) + 1;
}

/**
 * Log mel band energies per frame; also reports per-frame RMS so callers
 * can gate silence.
 */
export function logMelFrames(
  samples: Float64Array,
  sampleRateHz: number,
  nBands: number,
  spec: FrameSpec,
): { logMel: Float64Array[]; rms: Float64Array } {
  const n = frameCount(samples.length, spec);
  if (n === 0) {
    throw new Error("audio shorter than one analysis frame");
  }
  const nfft = nextPowerOfTwo(spec.frameLength);
  const window = hannWindow(spec.frameLength);
  const bank = melFilterbank(nBands, nfft, sampleRateHz, 50, Math.min(7600, sampleRateHz / 2 - 200));
  const logMel: Float64Array[] = [];
  const rms = new Float64Array(n);
  const frame = new Float64Array(spec.frameLength);
  for (let i = 0; i < n; i++) {
    let energy = 0;
    for (let j = 0; j < spec.frameLength; j++) {
      const s = samples[i * spec.hopLength + j];
      energy += s * s;
      frame[j] = s * window[j];
    }
    rms[i] = Math.sqrt(energy / spec.frameLength);
    const power = powerSpectrum(frame, nfft);
    const bands = new Float64Array(nBands);
    for (let b = 0; b < nBands; b++) {
      let acc = 0;
      const filt = bank[b];
      for (let k = 0; k < power.length; k++) {
        acc += filt[k] * power[k];
      }
      bands[b] = Math.log(acc + 1e-12);
    }
    logMel.push(bands);
  }
  return { logMel, rms };
}
