import { test } from 'node:test'
import * as assert from 'node:assert/strict'
import * as fs from 'fs'
import * as path from 'path'
import * as os from 'os'

import { readCsv, parseCsv, SchemaError } from '../src/csv'
import { renderHeatmap, renderFctOooBars, renderLines, renderTimeline } from '../src/plots'
import { main } from '../src/cli'

const FIX = path.join(__dirname, '..', '..', 'test', 'fixtures')

const sweepPath = path.join(FIX, 'sweep.csv')
const ecmpPath = path.join(FIX, 'flows_ecmp.csv')
const flowcutPath = path.join(FIX, 'flows_flowcut.csv')
const modelPath = path.join(FIX, 'model_memory.csv')
const summaryPath = path.join(FIX, 'summary_flowcut.json')

function heatmap(): string {
  return renderHeatmap(readCsv(sweepPath), 'routing.rtt_ratio_threshold',
    'routing.alpha', 'avg_fct_ns', 'sweep')
}

test('heatmap renders a 5x4 grid of cells', () => {
  const svg = heatmap()
  const cells = svg.match(/class="cell"/g) ?? []
  assert.equal(cells.length, 20)
})

test('rendering is byte-deterministic', () => {
  assert.equal(heatmap(), heatmap())
  const bars = () => renderFctOooBars(
    [{ label: 'ecmp', path: ecmpPath }, { label: 'flowcut', path: flowcutPath }], 'fct')
  assert.equal(bars(), bars())
  const lines = () => renderLines(readCsv(modelPath), 'latency_s', 'memory', 'model')
  assert.equal(lines(), lines())
})

test('renders match the committed golden figures', () => {
  const golden = (name: string) =>
    fs.readFileSync(path.join(FIX, name), 'utf8')
  assert.equal(heatmap(), golden('golden_heatmap.svg'))
  assert.equal(renderFctOooBars(
    [{ label: 'ecmp', path: ecmpPath }, { label: 'flowcut', path: flowcutPath }],
    'p99 FCT and out-of-order packets per policy'), golden('golden_bars.svg'))
  assert.equal(renderLines(readCsv(modelPath), 'latency_s', 'memory',
    'switch memory model (MiB)'), golden('golden_lines.svg'))
})

test('bar chart carries one bar pair per policy', () => {
  const svg = renderFctOooBars(
    [{ label: 'ecmp', path: ecmpPath }, { label: 'flowcut', path: flowcutPath }], 'fct')
  const bars = svg.match(/class="bar"/g) ?? []
  assert.equal(bars.length, 4) // 2 policies x (fct panel + ooo panel)
  assert.ok(svg.includes('>ecmp<') && svg.includes('>flowcut<'))
})

test('memory-model curve is monotone on the latency axis', () => {
  const table = readCsv(modelPath)
  const svg = renderLines(table, 'latency_s', 'memory', 'model')
  const match = svg.match(/<polyline points="([^"]+)"/)
  assert.ok(match)
  const ys = match![1].split(' ').map((p) => Number(p.split(',')[1]))
  for (let i = 1; i < ys.length; i++) {
    assert.ok(ys[i] <= ys[i - 1], 'pixel y must fall as memory grows')
  }
})

test('timeline renders from summary.json', () => {
  const svg = renderTimeline(summaryPath, 'timeline')
  assert.ok(svg.includes('<polyline'))
  assert.ok(svg.includes('delivered bytes per bucket'))
})

test('schema mismatch fails loudly with the column name', () => {
  const table = parseCsv('a,b\n1,2\n', 'broken.csv')
  assert.throws(
    () => renderHeatmap(table, 'routing.rtt_ratio_threshold', 'routing.alpha',
      'avg_fct_ns', 't'),
    (err: Error) => err instanceof SchemaError
      && err.message.includes('routing.rtt_ratio_threshold')
      && err.message.includes('broken.csv'))
  const tmp = path.join(os.tmpdir(), `flows_missing_${process.pid}.csv`)
  fs.writeFileSync(tmp, 'flow_key_hash,src,dst\nx,0,1\n')
  try {
    assert.throws(
      () => renderFctOooBars([{ label: 'x', path: tmp }], 't'),
      (err: Error) => err instanceof SchemaError && err.message.includes('fct_ns'))
  } finally {
    fs.unlinkSync(tmp)
  }
})

test('rendering never mutates the input files', () => {
  const before = fs.readFileSync(sweepPath)
  heatmap()
  assert.deepEqual(fs.readFileSync(sweepPath), before)
})

test('cli writes figures and propagates schema errors as exit 1', () => {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'plots-'))
  try {
    const out = path.join(dir, 'heat.svg')
    assert.equal(main(['heatmap', '--input', sweepPath, '--out', out]), 0)
    assert.ok(fs.readFileSync(out, 'utf8').startsWith('<svg'))
    const bad = path.join(dir, 'bad.csv')
    fs.writeFileSync(bad, 'a,b\n1,2\n')
    assert.equal(main(['heatmap', '--input', bad, '--out', out]), 1)
    assert.equal(main(['nope', '--input', sweepPath]), 1)
  } finally {
    fs.rmSync(dir, { recursive: true, force: true })
  }
})
