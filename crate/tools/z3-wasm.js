#!/usr/bin/env node
// SMT-LIB2 pipe around the z3 WebAssembly build (npm package `z3-solver`).
//
// Reads a full SMT-LIB2 script on stdin, evaluates it, and writes the solver
// responses (check-sat result, get-value answers) to stdout. Use it as a
// drop-in solver command on machines without a native z3 binary:
//
//   npm install -g z3-solver   (or npm install z3-solver next to this file)
//   parsynth --solver "node tools/z3-wasm.js" ...

'use strict';

function loadZ3() {
  try {
    return require('z3-solver');
  } catch (e) {
    // Fall back to the global npm root when the package is not installed
    // locally (require() does not search there by default).
    const { execSync } = require('child_process');
    const path = require('path');
    const root = execSync('npm root -g', { encoding: 'utf8' }).trim();
    return require(path.join(root, 'z3-solver'));
  }
}

async function main() {
  const chunks = [];
  process.stdin.on('data', (c) => chunks.push(c));
  await new Promise((resolve) => process.stdin.on('end', resolve));
  const script = Buffer.concat(chunks).toString('utf8');

  const { init } = loadZ3();
  const { Z3 } = await init();
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);
  const out = await Z3.eval_smtlib2_string(ctx, script);
  if (out && out.length > 0) {
    process.stdout.write(out.endsWith('\n') ? out : out + '\n');
  }
  process.exit(0);
}

main().catch((e) => {
  process.stderr.write(String(e && e.stack ? e.stack : e) + '\n');
  process.exit(1);
});
