/** Batch figure generation:
 *
 *   node dist/src/cli.js heatmap  --input sweep.csv --out heat.svg
 *   node dist/src/cli.js bars     --input ecmp/flows.csv --label ecmp \
 *                                 --input fc/flows.csv --label flowcut --out b.svg
 *   node dist/src/cli.js lines    --input model.csv --x latency_s --y memory --out m.svg
 *   node dist/src/cli.js timeline --input summary.json --out t.svg
 *
 * Exit codes: 0 ok, 1 bad usage or schema mismatch.
 */

import * as fs from 'fs'

import { readCsv, SchemaError } from './csv'
import { renderHeatmap, renderFctOooBars, renderLines, renderTimeline } from './plots'

interface Args {
  kind: string
  inputs: string[]
  labels: string[]
  out: string
  x: string
  y: string
  value: string
  title: string
}

function parseArgs(argv: string[]): Args {
  const args: Args = {
    kind: argv[0] ?? '', inputs: [], labels: [], out: 'figure.svg',
    x: '', y: '', value: 'avg_fct_ns', title: '',
  }
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i]
    const val = argv[i + 1]
    if (val === undefined) throw new Error(`missing value for ${key}`)
    switch (key) {
      case '--input': args.inputs.push(val); break
      case '--label': args.labels.push(val); break
      case '--out': args.out = val; break
      case '--x': args.x = val; break
      case '--y': args.y = val; break
      case '--value': args.value = val; break
      case '--title': args.title = val; break
      default: throw new Error(`unknown option ${key}`)
    }
  }
  if (!args.inputs.length) throw new Error('need at least one --input')
  return args
}

export function main(argv: string[]): number {
  let args: Args
  try {
    args = parseArgs(argv)
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`)
    return 1
  }
  try {
    let svg: string
    switch (args.kind) {
      case 'heatmap':
        svg = renderHeatmap(readCsv(args.inputs[0]),
          args.x || 'routing.rtt_ratio_threshold', args.y || 'routing.alpha',
          args.value, args.title || 'avg FCT (us) over the sweep grid')
        break
      case 'bars':
        svg = renderFctOooBars(
          args.inputs.map((path, i) => ({ path, label: args.labels[i] ?? `run${i}` })),
          args.title || 'p99 FCT and out-of-order packets per policy')
        break
      case 'lines':
        svg = renderLines(readCsv(args.inputs[0]), args.x || 'latency_s',
          args.y || 'memory', args.title || 'switch memory model (MiB)')
        break
      case 'timeline':
        svg = renderTimeline(args.inputs[0], args.title || 'delivered bytes over time')
        break
      default:
        console.error(`unknown plot kind '${args.kind}' (want heatmap|bars|lines|timeline)`)
        return 1
    }
    fs.writeFileSync(args.out, svg)
    console.log(`wrote ${args.out}`)
    return 0
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`)
    } else {
      console.error(`error: ${(err as Error).message}`)
    }
    return 1
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)))
}
