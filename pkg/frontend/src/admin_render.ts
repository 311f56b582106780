// Pure renderers for the admin console.

import { escapeHtml } from "./render.js";
import type {
  AdminLibrarian,
  AdminResource,
  Discipline,
  MassEmailReport,
  UsageReport,
} from "./types.js";

export function renderAdminLogin(): string {
  return (
    `<div class="admin-login"><h1>Administration</h1>` +
    `<form data-form="admin-login">` +
    `<label>Username <input name="username" required></label>` +
    `<label>Password <input name="password" type="password" required></label>` +
    `<button type="submit">Sign in</button>` +
    `</form></div>`
  );
}

export function renderAdminShell(content: string): string {
  const tabs = ["disciplines", "librarians", "resources", "messages", "mass-email", "reports"]
    .map((t) => `<a href="#" data-action="tab" data-tab="${t}">${t}</a>`)
    .join(" | ");
  return `<div class="admin"><nav>${tabs}</nav><main>${content}</main></div>`;
}

export function renderDisciplines(rows: Discipline[]): string {
  const body = rows.map(
    (d) =>
      `<tr><td>${d.id}</td><td>${escapeHtml(d.name)}</td>` +
      `<td>${escapeHtml(d.description)}</td>` +
      `<td><button data-action="delete" data-kind="disciplines" data-id="${d.id}">delete</button></td></tr>`,
  );
  return (
    `<table><tr><th>id</th><th>name</th><th>description</th><th></th></tr>${body.join("")}</table>` +
    `<form data-form="upsert-discipline">` +
    `<input name="name" placeholder="Name" required>` +
    `<input name="description" placeholder="Description">` +
    `<button type="submit">Add discipline</button></form>`
  );
}

export function renderLibrarians(rows: AdminLibrarian[], disciplines: Discipline[]): string {
  const body = rows.map(
    (l) =>
      `<tr><td>${l.id}</td><td>${escapeHtml(l.name)}</td><td>${escapeHtml(l.email)}</td>` +
      `<td>${escapeHtml(l.role)}</td><td>${l.discipline_ids.join(", ")}</td>` +
      `<td><button data-action="delete" data-kind="librarians" data-id="${l.id}">delete</button></td></tr>`,
  );
  const options = disciplines.map((d) => `<option value="${d.id}">${escapeHtml(d.name)}</option>`);
  return (
    `<table><tr><th>id</th><th>name</th><th>email</th><th>role</th><th>disciplines</th><th></th></tr>` +
    `${body.join("")}</table>` +
    `<form data-form="upsert-librarian">` +
    `<input name="name" placeholder="Name" required>` +
    `<input name="phone" placeholder="Phone">` +
    `<input name="email" placeholder="Email">` +
    `<select name="role"><option value="reference_librarian">reference librarian</option>` +
    `<option value="collection_manager">collection manager</option></select>` +
    `<select name="discipline_id">${options.join("")}</select>` +
    `<button type="submit">Add librarian</button></form>`
  );
}

export function renderResources(rows: AdminResource[], disciplines: Discipline[]): string {
  const body = rows.map(
    (r) =>
      `<tr><td>${r.id}</td><td>${escapeHtml(r.kind)}</td><td>${escapeHtml(r.title)}</td>` +
      `<td>${r.discipline_ids.join(", ")}</td>` +
      `<td><button data-action="delete" data-kind="resources" data-id="${r.id}">delete</button></td></tr>`,
  );
  const kinds = [
    "library_link",
    "university_link",
    "reference",
    "bibliographic_database",
    "electronic_journal",
    "quick_search_engine",
  ].map((k) => `<option value="${k}">${k}</option>`);
  const options = disciplines.map((d) => `<option value="${d.id}">${escapeHtml(d.name)}</option>`);
  return (
    `<table><tr><th>id</th><th>kind</th><th>title</th><th>disciplines</th><th></th></tr>` +
    `${body.join("")}</table>` +
    `<form data-form="upsert-resource">` +
    `<select name="kind">${kinds.join("")}</select>` +
    `<input name="title" placeholder="Title" required>` +
    `<input name="url" placeholder="https://..." required>` +
    `<input name="url_template" placeholder="URL template with {query} (search engines)">` +
    `<select name="discipline_id">${options.join("")}</select>` +
    `<button type="submit">Add resource</button></form>`
  );
}

export function renderMessages(disciplines: Discipline[]): string {
  const options = disciplines.map((d) => `<option value="${d.id}">${escapeHtml(d.name)}</option>`);
  return (
    `<form data-form="global-message">` +
    `<h3>Global message</h3>` +
    `<textarea name="body" placeholder="Shown to every user; empty clears"></textarea>` +
    `<button type="submit">Publish</button></form>` +
    `<form data-form="discipline-message">` +
    `<h3>Message from the Librarian</h3>` +
    `<select name="discipline_id">${options.join("")}</select>` +
    `<textarea name="body" placeholder="Shown to one discipline; empty clears"></textarea>` +
    `<button type="submit">Publish</button></form>`
  );
}

export function renderMassEmail(disciplines: Discipline[], report?: MassEmailReport): string {
  const options = disciplines.map(
    (d) => `<label><input type="checkbox" name="discipline_ids" value="${d.id}"> ${escapeHtml(d.name)}</label>`,
  );
  const summary = report
    ? `<p class="report">Sent to ${report.recipients} recipient(s), ` +
      `${report.skipped_opt_out} opted out, ${report.failed} failed (${report.id}).</p>`
    : "";
  return (
    `<form data-form="mass-email">` +
    `<h3>Mass email</h3>${options.join("<br>")}<br>` +
    `<input name="subject" placeholder="Subject" required>` +
    `<textarea name="body" placeholder="Body" required></textarea>` +
    `<button type="submit">Send</button></form>${summary}`
  );
}

export function renderUsageReport(report: UsageReport): string {
  const keys = Object.keys(report.counters).sort();
  const rows = keys.map(
    (k) => `<tr><td>${escapeHtml(k)}</td><td>${report.counters[k]}</td></tr>`,
  );
  return (
    `<form data-form="report-period">` +
    `<label>From <input name="from" type="date" value="${report.from ?? ""}"></label>` +
    `<label>To <input name="to" type="date" value="${report.to ?? ""}"></label>` +
    `<button type="submit">Refresh</button></form>` +
    `<p>${report.distinct_users} distinct user(s), ${report.total} request(s), ` +
    `${report.malformed} malformed line(s).</p>` +
    `<table><tr><th>route</th><th>hits</th></tr>${rows.join("")}</table>`
  );
}
