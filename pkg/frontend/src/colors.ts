// Rainbow pitch mapping: hue runs linearly over the singable range,
// red at A3 rising to violet at C5. Both the note bodies and the
// pitch-dot guidance share this scale.

export const MIDI_LO = 57; // A3
export const MIDI_HI = 72; // C5

export function hueForMidi(midi: number): number {
  const t = (midi - MIDI_LO) / (MIDI_HI - MIDI_LO);
  return Math.min(Math.max(t, 0), 1) * 280;
}

export function colorForMidi(midi: number, alpha = 1): string {
  return `hsla(${hueForMidi(midi).toFixed(1)}, 85%, 55%, ${alpha})`;
}
