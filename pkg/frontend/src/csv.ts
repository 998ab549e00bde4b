import * as fs from 'fs'

export interface Table {
  path: string
  columns: string[]
  rows: string[][]
}

/** Raised when an input file does not carry a column a plot needs. */
export class SchemaError extends Error {
  readonly column: string
  constructor(column: string, path: string) {
    super(`missing column '${column}' in ${path}`)
    this.column = column
  }
}

export function parseCsv(text: string, path: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0)
  if (lines.length === 0) {
    throw new Error(`${path}: empty CSV`)
  }
  const columns = lines[0].split(',')
  const rows = lines.slice(1).map((l) => l.split(','))
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new Error(`${path}: row has ${row.length} fields, header has ${columns.length}`)
    }
  }
  return { path, columns, rows }
}

export function readCsv(path: string): Table {
  return parseCsv(fs.readFileSync(path, 'utf8'), path)
}

export function columnIndex(table: Table, name: string): number {
  const i = table.columns.indexOf(name)
  if (i < 0) throw new SchemaError(name, table.path)
  return i
}

export function numericColumn(table: Table, name: string): number[] {
  const i = columnIndex(table, name)
  return table.rows.map((row) => {
    const v = Number(row[i])
    if (Number.isNaN(v)) {
      throw new Error(`${table.path}: non-numeric value '${row[i]}' in column '${name}'`)
    }
    return v
  })
}
