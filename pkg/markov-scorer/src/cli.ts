/**
 * Command line entry points: train a scorer, serve it over TCP, export
 * static potential tables, or dump the vocabulary for stream clients.
 */

import * as fs from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadCheckpoint, saveCheckpoint } from "./checkpoint.js";
import { exportTables } from "./export.js";
import { createScorerServer, listen } from "./server.js";
import { train } from "./train.js";
import { encode } from "./vocab.js";

export async function main(argv: string[]): Promise<void> {
  await yargs(argv)
    .scriptName("markov-scorer")
    .command(
      "train <corpus> <out>",
      "Train a barrier-masked scorer on a token corpus",
      (y) => y
        .positional("corpus", { type: "string", demandOption: true })
        .positional("out", { type: "string", demandOption: true })
        .option("order", { type: "number", default: 2 })
        .option("epochs", { type: "number", default: 50 })
        .option("seed", { type: "number", default: 1234 })
        .option("lr", { type: "number", default: 0.01 }),
      (args) => {
        const lines = fs.readFileSync(args.corpus, "utf-8").split("\n");
        const result = train(lines, {
          order: args.order,
          epochs: args.epochs,
          seed: args.seed,
          learningRate: args.lr,
          log: (line) => console.log(line),
        });
        saveCheckpoint(result.model, args.out);
        console.log(`saved checkpoint to ${args.out}`);
      })
    .command(
      "serve <checkpoint>",
      "Serve span potentials over the TCP line protocol",
      (y) => y
        .positional("checkpoint", { type: "string", demandOption: true })
        .option("host", { type: "string", default: "127.0.0.1" })
        .option("port", { type: "number", default: 0 }),
      async (args) => {
        const model = loadCheckpoint(args.checkpoint);
        const server = createScorerServer(model);
        const port = await listen(server, args.host, args.port);
        console.log(`listening ${args.host} ${port}`);
        await new Promise(() => {});
      })
    .command(
      "export <checkpoint> <out>",
      "Write static potential tables for every span",
      (y) => y
        .positional("checkpoint", { type: "string", demandOption: true })
        .positional("out", { type: "string", demandOption: true })
        .option("length", { type: "number", demandOption: true })
        .option("orders", { type: "number", demandOption: true })
        .option("source", { type: "string", default: "" }),
      (args) => {
        const model = loadCheckpoint(args.checkpoint);
        const ctx = args.source
          ? encode(model.vocab, args.source.trim().split(/\s+/))
          : [];
        exportTables(model, ctx, args.length, args.orders, args.out);
        console.log(`wrote ${args.out}`);
      })
    .command(
      "vocab <checkpoint> <out>",
      "Write the scorable token list, one per line",
      (y) => y
        .positional("checkpoint", { type: "string", demandOption: true })
        .positional("out", { type: "string", demandOption: true }),
      (args) => {
        const model = loadCheckpoint(args.checkpoint);
        fs.writeFileSync(args.out, model.vocab.tokens.join("\n") + "\n", "utf-8");
        console.log(`wrote ${args.out}`);
      })
    .demandCommand(1)
    .strict()
    .parseAsync();
}

const invokedDirectly = process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1]);
if (invokedDirectly) {
  main(hideBin(process.argv)).catch((err) => {
    console.error(String(err));
    process.exit(1);
  });
}
