// End-to-end: the client and renderers against the real service.
// Covers the full customize roundtrip and the logout flow.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, expect, test } from "vitest";

import { ApiClient, NotAuthenticated } from "../src/api.js";
import { renderCustomizeForm, renderPage } from "../src/render.js";
import { makeJarFetch } from "./jar_fetch.js";

const PORT = 8871;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | undefined;

const SEED = [
  { kind: "discipline", name: "Philosophy" },
  {
    kind: "librarian",
    name: "Sasha Birch",
    phone: "555-0136",
    email: "sasha@example.test",
    disciplines: ["Philosophy"],
  },
  {
    kind: "resource",
    resource_kind: "library_link",
    title: "Libraries home page",
    url: "https://example.test/home",
    disciplines: ["Philosophy"],
  },
  {
    kind: "resource",
    resource_kind: "bibliographic_database",
    title: "Current Contents",
    url: "https://example.test/cc",
    disciplines: ["Philosophy"],
  },
  {
    kind: "resource",
    resource_kind: "bibliographic_database",
    title: "Books in Print",
    url: "https://example.test/bip",
    disciplines: ["Philosophy"],
  },
  {
    kind: "recommendation",
    discipline: "Philosophy",
    section: "library_links",
    resources: ["Libraries home page"],
  },
  {
    kind: "recommendation",
    discipline: "Philosophy",
    section: "bibliographic_databases",
    resources: ["Current Contents"],
  },
  { kind: "admin", username: "root", password: "integration" },
];

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "libportal-ui-"));
  const configPath = join(dir, "config.json");
  const seedPath = join(dir, "seed.jsonl");
  writeFileSync(
    configPath,
    JSON.stringify({
      listen: `127.0.0.1:${PORT}`,
      data_dir: join(dir, "data"),
      default_discipline: "Philosophy",
    }),
  );
  writeFileSync(seedPath, SEED.map((r) => JSON.stringify(r)).join("\n") + "\n");

  execFileSync("libportal", ["seed", seedPath, "--config", configPath]);
  server = spawn("libportal", ["serve", "--config", configPath], { stdio: "ignore" });

  for (let attempt = 0; attempt < 60; attempt++) {
    try {
      const probe = await fetch(`${BASE}/login`);
      if (probe.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("service did not come up");
}, 30_000);

afterAll(() => {
  server?.kill();
});

test("customize roundtrip: render, check/uncheck, submit, re-render", async () => {
  const api = new ApiClient(BASE, makeJarFetch());

  const outcome = await api.login({ auth_id: "ui_user", name: "UI User" });
  expect(outcome.kind).toBe("page");
  if (outcome.kind !== "page") return;

  let html = renderPage(outcome.page);
  const regions = [...html.matchAll(/ id="section-([a-z_]+)"/g)].map((m) => m[1]);
  expect(regions).toHaveLength(13);
  expect(html).toContain("Current Contents"); // the discipline default

  // open the form, flip the checkboxes: uncheck Current Contents, check Books in Print
  const form = await api.getCustomizationForm("bibliographic_databases");
  const formHtml = renderCustomizeForm(form);
  const items = form.groups.flatMap((g) => g.items);
  const cc = items.find((i) => i.title === "Current Contents")!;
  const bip = items.find((i) => i.title === "Books in Print")!;
  expect(formHtml).toContain(`value="${cc.id}" checked`);
  expect(formHtml).not.toContain(`value="${bip.id}" checked`);

  const updated = await api.submitCustomization("bibliographic_databases", [bip.id]);
  html = renderPage(updated);
  const region = html.slice(html.indexOf('id="section-bibliographic_databases"'));
  const sectionHtml = region.slice(0, region.indexOf("</section>"));
  expect(sectionHtml).toContain("Books in Print");
  expect(sectionHtml).not.toContain("Current Contents");

  // a fresh read shows exactly the submitted set
  const fresh = await api.fetchPage();
  const block = fresh.sections.find((b) => b.section === "bibliographic_databases")!;
  expect(block.items.map((i) => (i as { id: string }).id)).toEqual([bip.id]);
}, 30_000);

test("logout navigates to entry and a forced /page fetch is rejected", async () => {
  const api = new ApiClient(BASE, makeJarFetch());
  await api.login({ auth_id: "leaver" });
  await api.fetchPage(); // session works

  await api.logout();
  await expect(api.fetchPage()).rejects.toBeInstanceOf(NotAuthenticated);
}, 30_000);

test("admin console flow drives the admin API", async () => {
  const api = new ApiClient(BASE, makeJarFetch());
  expect(await api.adminLogin("root", "wrong")).toBe(false);
  expect(await api.adminLogin("root", "integration")).toBe(true);

  await api.adminUpsert("disciplines", { name: "History" });
  const disciplines = await api.adminList("disciplines");
  expect(disciplines.map((d) => d.name)).toContain("History");

  await api.adminSetGlobalMessage("Maintenance tonight");
  const report = await api.adminUsageReport();
  expect(report.total).toBeGreaterThan(0);
}, 30_000);
