/** Figure renderers over the simulator's result files.
 *
 * Every plotted number is read from the input files; the only processing is
 * layout plus, for the bar chart, picking the nearest-rank order statistic
 * out of the per-flow column (the same definition the simulator reports).
 */

import * as fs from 'fs'

import { Table, readCsv, columnIndex, numericColumn } from './csv'
import { Svg, colorRamp, fmt, linearScale, niceTicks } from './svg'

const MARGIN = { left: 70, right: 30, top: 40, bottom: 55 }

export interface LabeledInput {
  label: string
  path: string
}

function panel(width: number, height: number): { svg: Svg; w: number; h: number } {
  const svg = new Svg(width, height)
  return { svg, w: width - MARGIN.left - MARGIN.right, h: height - MARGIN.top - MARGIN.bottom }
}

function uniqueSorted(values: number[]): number[] {
  return Array.from(new Set(values)).sort((a, b) => a - b)
}

/** Sweep CSV -> threshold x alpha grid of a value column (mean over
 * duplicate cell rows, e.g. seeds). Darker cells carry larger values. */
export function renderHeatmap(
  table: Table, xColumn: string, yColumn: string, valueColumn: string,
  title: string,
): string {
  const xs = numericColumn(table, xColumn)
  const ys = numericColumn(table, yColumn)
  const vs = numericColumn(table, valueColumn)
  const xTicks = uniqueSorted(xs)
  const yTicks = uniqueSorted(ys)
  const sums = new Map<string, { total: number; n: number }>()
  for (let i = 0; i < vs.length; i++) {
    const k = `${xs[i]}|${ys[i]}`
    const cur = sums.get(k) ?? { total: 0, n: 0 }
    cur.total += vs[i]
    cur.n += 1
    sums.set(k, cur)
  }
  const { svg, w, h } = panel(560, 420)
  const cellW = w / xTicks.length
  const cellH = h / yTicks.length
  let lo = Infinity
  let hi = -Infinity
  for (const { total, n } of sums.values()) {
    const v = total / n
    lo = Math.min(lo, v)
    hi = Math.max(hi, v)
  }
  for (let xi = 0; xi < xTicks.length; xi++) {
    for (let yi = 0; yi < yTicks.length; yi++) {
      const cellEntry = sums.get(`${xTicks[xi]}|${yTicks[yi]}`)
      if (!cellEntry) continue
      const v = cellEntry.total / cellEntry.n
      const t = hi === lo ? 0.5 : (v - lo) / (hi - lo)
      const x = MARGIN.left + xi * cellW
      const y = MARGIN.top + (yTicks.length - 1 - yi) * cellH
      svg.rect(x, y, cellW - 1, cellH - 1, colorRamp(1 - t), 'cell')
      svg.text(x + cellW / 2, y + cellH / 2 + 4, fmt(v / 1000), 10)
    }
  }
  for (let xi = 0; xi < xTicks.length; xi++) {
    svg.text(MARGIN.left + (xi + 0.5) * cellW, MARGIN.top + h + 18, fmt(xTicks[xi]))
  }
  for (let yi = 0; yi < yTicks.length; yi++) {
    svg.text(MARGIN.left - 12, MARGIN.top + (yTicks.length - 0.5 - yi) * cellH + 4,
      fmt(yTicks[yi]), 11, 'end')
  }
  svg.text(MARGIN.left + w / 2, 22, title, 13)
  svg.text(MARGIN.left + w / 2, MARGIN.top + h + 40, xColumn)
  svg.text(18, MARGIN.top + h / 2, yColumn, 11, 'middle', -90)
  return svg.render()
}

function nearestRank(values: number[], q: number): number {
  const ordered = [...values].sort((a, b) => a - b)
  const rank = Math.max(1, Math.ceil((q / 100) * ordered.length))
  return ordered[rank - 1]
}

/** Per-policy flows.csv files -> side-by-side p99 FCT and total
 * out-of-order-packet bars. */
export function renderFctOooBars(inputs: LabeledInput[], title: string): string {
  const stats = inputs.map(({ label, path }) => {
    const table = readCsv(path)
    const fct = numericColumn(table, 'fct_ns')
    const ooo = numericColumn(table, 'ooo_packets')
    return { label, p99: nearestRank(fct, 99), ooo: ooo.reduce((a, b) => a + b, 0) }
  })
  const { svg, w, h } = panel(680, 400)
  const half = w / 2 - 20
  const drawPanel = (x0: number, values: number[], name: string, unit: string) => {
    const top = Math.max(...values, 1)
    const scale = linearScale(0, top, 0, h)
    const slot = half / values.length
    values.forEach((v, i) => {
      const bh = scale(v)
      const x = x0 + i * slot + slot * 0.18
      svg.rect(x, MARGIN.top + h - bh, slot * 0.64, bh, i % 2 ? '#d08a28' : '#2868b0', 'bar')
      svg.text(x + slot * 0.32, MARGIN.top + h - bh - 6, fmt(v), 10)
      svg.text(x + slot * 0.32, MARGIN.top + h + 16, stats[i].label, 11)
    })
    svg.line(x0, MARGIN.top + h, x0 + half, MARGIN.top + h)
    svg.text(x0 + half / 2, MARGIN.top + h + 36, `${name} ${unit}`, 12)
  }
  drawPanel(MARGIN.left, stats.map((s) => s.p99 / 1000), 'p99 FCT', '(us)')
  drawPanel(MARGIN.left + half + 40, stats.map((s) => s.ooo), 'out-of-order packets', '(count)')
  svg.text(MARGIN.left + w / 2, 22, title, 13)
  return svg.render()
}

/** Model CSV -> x/y curve (memory over latency, active flows over rate, ...). */
export function renderLines(table: Table, xColumn: string, yColumn: string,
  title: string): string {
  const xs = numericColumn(table, xColumn)
  const ys = numericColumn(table, yColumn)
  const { svg, w, h } = panel(560, 400)
  const sx = linearScale(Math.min(...xs), Math.max(...xs), MARGIN.left, MARGIN.left + w)
  const top = Math.max(...ys)
  const sy = linearScale(0, top, MARGIN.top + h, MARGIN.top)
  const pts: Array<[number, number]> = xs.map((x, i) => [sx(x), sy(ys[i])])
  svg.line(MARGIN.left, MARGIN.top + h, MARGIN.left + w, MARGIN.top + h)
  svg.line(MARGIN.left, MARGIN.top, MARGIN.left, MARGIN.top + h)
  for (const t of niceTicks(Math.min(...xs), Math.max(...xs))) {
    svg.text(sx(t), MARGIN.top + h + 18, t.toExponential(0), 10)
  }
  for (const t of niceTicks(0, top)) {
    svg.text(MARGIN.left - 8, sy(t) + 4, fmt(t / (1024 * 1024)), 10, 'end')
  }
  svg.polyline(pts, '#2868b0')
  for (const [x, y] of pts) svg.rect(x - 2, y - 2, 4, 4, '#2868b0', 'pt')
  svg.text(MARGIN.left + w / 2, 22, title, 13)
  svg.text(MARGIN.left + w / 2, MARGIN.top + h + 40, xColumn)
  svg.text(18, MARGIN.top + h / 2, yColumn, 11, 'middle', -90)
  return svg.render()
}

/** summary.json -> delivered bytes per time bucket. */
export function renderTimeline(summaryPath: string, title: string): string {
  const parsed = JSON.parse(fs.readFileSync(summaryPath, 'utf8'))
  const timeline: Array<[number, number]> = parsed.throughput_timeline_ns_bytes
  if (!timeline) {
    throw new Error(`missing column 'throughput_timeline_ns_bytes' in ${summaryPath}`)
  }
  const { svg, w, h } = panel(640, 360)
  const xs = timeline.map(([t]) => t / 1000)
  const ys = timeline.map(([, b]) => b)
  const sx = linearScale(Math.min(...xs), Math.max(...xs), MARGIN.left, MARGIN.left + w)
  const sy = linearScale(0, Math.max(...ys), MARGIN.top + h, MARGIN.top)
  svg.line(MARGIN.left, MARGIN.top + h, MARGIN.left + w, MARGIN.top + h)
  svg.line(MARGIN.left, MARGIN.top, MARGIN.left, MARGIN.top + h)
  svg.polyline(xs.map((x, i) => [sx(x), sy(ys[i])] as [number, number]), '#2868b0')
  for (const t of niceTicks(Math.min(...xs), Math.max(...xs))) {
    svg.text(sx(t), MARGIN.top + h + 18, fmt(t), 10)
  }
  svg.text(MARGIN.left + w / 2, 22, title, 13)
  svg.text(MARGIN.left + w / 2, MARGIN.top + h + 40, 'time (us)')
  svg.text(18, MARGIN.top + h / 2, 'delivered bytes per bucket', 11, 'middle', -90)
  return svg.render()
}
