#!/usr/bin/env node
/**
 * Render harness CSVs into the four figure families as SVG.
 *
 * Usage:
 *   eitlab-figures render --family scaling --in sweep.csv --out fig.svg
 *                         [--in traces.csv] [--meta summary.json]
 *                         [--tau-us 400] [--annotations out.json]
 *
 * Exit codes: 0 rendered, 2 usage/schema error, 4 empty input (warning, no
 * image written). Images embed the producing config hash in the footer,
 * taken from the harness JSON summary when given, else hashed from the
 * input CSV bytes.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { dirname } from "node:path";

import {
  RADTRAP_COLUMNS,
  SWEEP_COLUMNS,
  SchemaError,
  TRACE_COLUMNS,
  Table,
  readTable,
  requireColumns,
} from "./csv";
import { FAMILIES, Family, renderFamily } from "./render";

export const EXIT_OK = 0;
export const EXIT_USAGE = 2;
export const EXIT_EMPTY = 4;

interface Args {
  family: Family;
  inputs: string[];
  out: string;
  meta?: string;
  tauUs?: number;
  annotations?: string;
}

function parseArgs(argv: string[]): Args {
  if (argv[0] !== "render") {
    throw new UsageError(`unknown command ${JSON.stringify(argv[0] ?? "")}; expected "render"`);
  }
  const args: Partial<Args> = { inputs: [] };
  let i = 1;
  const need = (flag: string): string => {
    const value = argv[i + 1];
    if (value === undefined) {
      throw new UsageError(`${flag} needs a value`);
    }
    i += 2;
    return value;
  };
  while (i < argv.length) {
    const flag = argv[i];
    switch (flag) {
      case "--family": {
        const family = need(flag);
        if (!FAMILIES.includes(family as Family)) {
          throw new UsageError(
            `--family must be one of ${FAMILIES.join("|")}, got ${JSON.stringify(family)}`,
          );
        }
        args.family = family as Family;
        break;
      }
      case "--in":
        args.inputs!.push(need(flag));
        break;
      case "--out":
        args.out = need(flag);
        break;
      case "--meta":
        args.meta = need(flag);
        break;
      case "--tau-us":
        args.tauUs = Number(need(flag));
        break;
      case "--annotations":
        args.annotations = need(flag);
        break;
      default:
        throw new UsageError(`unknown flag ${JSON.stringify(flag)}`);
    }
  }
  if (!args.family) {
    throw new UsageError("--family is required");
  }
  if (!args.inputs || args.inputs.length === 0) {
    throw new UsageError("at least one --in CSV is required");
  }
  if (!args.out) {
    throw new UsageError("--out is required");
  }
  return args as Args;
}

class UsageError extends Error {}

const FAMILY_SCHEMAS: Record<Family, string[][]> = {
  scaling: [SWEEP_COLUMNS],
  efficiency: [SWEEP_COLUMNS],
  accounting: [SWEEP_COLUMNS, TRACE_COLUMNS],
  trapping: [RADTRAP_COLUMNS],
};

function configHash(meta: string | undefined, rawInputs: Buffer[]): string {
  if (meta) {
    const summary = JSON.parse(readFileSync(meta, "utf-8")) as {
      config_sha256?: string;
    };
    if (summary.config_sha256) {
      return summary.config_sha256.slice(0, 12);
    }
  }
  const hash = createHash("sha256");
  for (const raw of rawInputs) {
    hash.update(raw);
  }
  return hash.digest("hex").slice(0, 12);
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return EXIT_USAGE;
    }
    throw err;
  }

  const schemas = FAMILY_SCHEMAS[args.family];
  if (args.inputs.length > schemas.length) {
    console.error(
      `usage error: family ${args.family} takes at most ${schemas.length} input file(s)`,
    );
    return EXIT_USAGE;
  }

  const rawInputs: Buffer[] = [];
  const tables: Table[] = [];
  for (let i = 0; i < args.inputs.length; i += 1) {
    const raw = readFileSync(args.inputs[i]);
    rawInputs.push(raw);
    let table: Table;
    try {
      table = readTable(raw.toString("utf-8"));
      requireColumns(table, schemas[i]);
    } catch (err) {
      if (err instanceof SchemaError) {
        console.error(`schema error in ${args.inputs[i]}: ${err.message}`);
        return EXIT_USAGE;
      }
      throw err;
    }
    tables.push(table);
  }

  if (tables[0].rows.length === 0) {
    console.error(`warning: ${args.inputs[0]} has no data rows; nothing rendered`);
    return EXIT_EMPTY;
  }

  const footer = `config ${configHash(args.meta, rawInputs)}`;
  const result = renderFamily(args.family, tables, {
    tauUs: args.tauUs,
    footer,
  });
  for (const warning of result.warnings) {
    console.error(`warning: ${warning}`);
  }
  mkdirSync(dirname(args.out), { recursive: true });
  writeFileSync(args.out, result.svg, "utf-8");
  if (args.annotations) {
    mkdirSync(dirname(args.annotations), { recursive: true });
    writeFileSync(
      args.annotations,
      `${JSON.stringify(result.annotations, Object.keys(result.annotations).sort(), 2)}\n`,
      "utf-8",
    );
  }
  console.log(`wrote ${args.out}`);
  return EXIT_OK;
}

if (require.main === module) {
  process.exit(run(process.argv.slice(2)));
}
