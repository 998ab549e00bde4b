/** Tiny deterministic SVG builder: plain string assembly, fixed number
 * formatting, no timestamps or randomness, so identical inputs yield
 * byte-identical files. */

export function fmt(n: number): string {
  // fixed 3-decimal formatting with trailing zeros trimmed
  const s = n.toFixed(3)
  return s.replace(/\.?0+$/, '') || '0'
}

export function escapeText(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
}

export class Svg {
  readonly width: number
  readonly height: number
  private parts: string[] = []

  constructor(width: number, height: number) {
    this.width = width
    this.height = height
  }

  rect(x: number, y: number, w: number, h: number, fill: string, cls?: string): void {
    const c = cls ? ` class="${cls}"` : ''
    this.parts.push(`<rect${c} x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`)
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = '#444', width = 1): void {
    this.parts.push(`<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"/>`)
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 2): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ')
    this.parts.push(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`)
  }

  text(x: number, y: number, content: string, size = 11, anchor = 'middle', rotate?: number): void {
    const r = rotate !== undefined ? ` transform="rotate(${fmt(rotate)} ${fmt(x)} ${fmt(y)})"` : ''
    this.parts.push(`<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" font-family="sans-serif" text-anchor="${anchor}"${r}>${escapeText(content)}</text>`)
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      '</svg>',
      '',
    ].join('\n')
  }
}

/** Dark-blue to yellow ramp over t in [0, 1]; darker means larger values on
 * heatmaps (matching "darker colors represent higher runtimes" when fed the
 * inverted fraction). */
export function colorRamp(t: number): string {
  const clamp = Math.max(0, Math.min(1, t))
  const r = Math.round(20 + 235 * clamp)
  const g = Math.round(30 + 195 * clamp)
  const b = Math.round(90 - 40 * clamp)
  const hex = (v: number) => v.toString(16).padStart(2, '0')
  return `#${hex(r)}${hex(g)}${hex(b)}`
}

export interface Scale {
  (v: number): number
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0
  return (v: number) => (span === 0 ? (r0 + r1) / 2 : r0 + ((v - d0) / span) * (r1 - r0))
}

export function niceTicks(min: number, max: number, count = 5): number[] {
  if (min === max) return [min]
  const step = (max - min) / (count - 1)
  const ticks: number[] = []
  for (let i = 0; i < count; i++) ticks.push(min + step * i)
  return ticks
}
