// Pure HTML renderers. Everything here is a function from server documents
// to markup strings; no state, no fetching, no DOM access, so the full
// rendering path is testable in node.

import type {
  AlertResult,
  AwarenessForm,
  CustomizationForm,
  LibrarianItem,
  MessageItem,
  PageDocument,
  ProfileItem,
  ResourceItem,
  SectionBlock,
  WindowForm,
} from "./types.js";

export const SECTION_TITLES: Record<string, string> = {
  header: "",
  global_message: "Welcome",
  message_from_librarian: "Message from the Librarian",
  your_librarians: "Your Librarians",
  library_links: "Library Links",
  university_links: "University Links",
  current_awareness: "Current Awareness",
  personal_links: "Personal Links",
  quick_searches: "Quick Searches",
  reference_shelf: "Reference Shelf",
  bibliographic_databases: "Bibliographic Databases",
  electronic_journals: "Electronic Journals",
  footer: "",
};

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export class MalformedDocument extends Error {}

function assertWellFormed(doc: PageDocument): void {
  if (!doc || typeof doc !== "object" || !Array.isArray(doc.sections)) {
    throw new MalformedDocument("page document has no sections");
  }
  for (const block of doc.sections) {
    if (typeof block.section !== "string" || !Array.isArray(block.items)) {
      throw new MalformedDocument("bad section block");
    }
  }
}

export function renderPage(doc: PageDocument): string {
  assertWellFormed(doc);
  const parts = doc.sections.map((block) => renderBlock(block, doc));
  return `<div class="page">${parts.join("")}</div>`;
}

export function renderErrorView(message: string): string {
  return `<div class="error-view"><h1>Something went wrong</h1>` +
    `<p>${escapeHtml(message)}</p></div>`;
}

export function renderEntryView(hint = ""): string {
  return (
    `<div class="entry-view"><h1>My Library</h1>` +
    `<p>Sign in to see your personalized library page.</p>` +
    (hint ? `<p class="hint">${escapeHtml(hint)}</p>` : "") +
    `<form data-form="login">` +
    `<label>Identity <input name="auth_id" required></label>` +
    `<label>Name <input name="name"></label>` +
    `<label>Email <input name="email" type="email"></label>` +
    `<label>Interest area <input name="discipline"></label>` +
    `<button type="submit">Sign in</button>` +
    `</form></div>`
  );
}

export function renderBanner(message: string): string {
  return `<div class="banner" role="alert">${escapeHtml(message)}</div>`;
}

// ---------------------------------------------------------------------------
// Section blocks
// ---------------------------------------------------------------------------

function renderBlock(block: SectionBlock, doc: PageDocument): string {
  const body = sectionBody(block, doc);
  if (block.section === "header" || block.section === "footer") {
    return body;
  }
  const title = SECTION_TITLES[block.section] ?? block.section;
  const customize = block.customizable
    ? ` <a href="#" class="customize" data-action="customize"` +
      ` data-section="${block.section}">Customize</a>`
    : "";
  return (
    `<section id="section-${block.section}" data-section="${block.section}">` +
    `<h2>${escapeHtml(title)}</h2>${customize}${body}</section>`
  );
}

function sectionBody(block: SectionBlock, doc: PageDocument): string {
  switch (block.section) {
    case "header":
      return renderHeader(block, doc);
    case "footer":
      return renderFooter(block);
    case "global_message":
    case "message_from_librarian":
      return renderMessage(block.items[0] as MessageItem | undefined);
    case "your_librarians":
      return renderLibrarians(block.items as LibrarianItem[]);
    case "current_awareness":
      return renderAwareness(block.items as ProfileItem[], block.window_form);
    case "quick_searches":
      return renderQuickSearches(block.items as ResourceItem[]);
    case "personal_links":
      return renderPersonalLinks(block.items as ResourceItem[]);
    default:
      return renderResourceList(block.items as ResourceItem[]);
  }
}

function renderHeader(block: SectionBlock, doc: PageDocument): string {
  const item = (block.items[0] ?? {}) as { user_name?: string; discipline?: string };
  const anchors = doc.sections
    .filter((b) => b.section !== "header" && b.section !== "footer")
    .map(
      (b) =>
        `<a href="#section-${b.section}">${escapeHtml(SECTION_TITLES[b.section] ?? b.section)}</a>`,
    );
  return (
    `<header id="section-header" data-section="header">` +
    `<div class="logo">MY LIBRARY</div>` +
    `<p class="greeting">Welcome back, ${escapeHtml(item.user_name ?? "")}` +
    ` (${escapeHtml(item.discipline ?? "")})</p>` +
    `<nav>${anchors.join(" | ")}</nav>` +
    `<button data-action="logout">Logout</button>` +
    `</header>`
  );
}

function renderFooter(block: SectionBlock): string {
  const item = (block.items[0] ?? {}) as { version?: string; contact?: string };
  return (
    `<footer id="section-footer" data-section="footer">` +
    `<p>Version ${escapeHtml(item.version ?? "")} &middot; ` +
    `Send comments to ${escapeHtml(item.contact ?? "")}</p>` +
    `</footer>`
  );
}

function renderMessage(item: MessageItem | undefined): string {
  const body = item?.body ?? "";
  return `<p class="message">${escapeHtml(body)}</p>`;
}

function renderLibrarians(items: LibrarianItem[]): string {
  const rows = items.map(
    (l) =>
      `<li>${escapeHtml(l.name)}` +
      (l.phone ? ` (${escapeHtml(l.phone)})` : "") +
      (l.email ? ` &lt;${escapeHtml(l.email)}&gt;` : "") +
      `</li>`,
  );
  return `<ol class="librarians">${rows.join("")}</ol>`;
}

function renderResourceList(items: ResourceItem[]): string {
  const rows = items.map(
    (r) =>
      `<li><a href="${escapeHtml(r.url)}" rel="noopener">${escapeHtml(r.title)}</a>` +
      (r.description ? ` &mdash; ${escapeHtml(r.description)}` : "") +
      `</li>`,
  );
  return `<ol class="resources">${rows.join("")}</ol>`;
}

function renderPersonalLinks(items: ResourceItem[]): string {
  const rows = items.map(
    (r) =>
      `<li><a href="${escapeHtml(r.url)}" rel="noopener">${escapeHtml(r.title)}</a> ` +
      `<button data-action="delete-personal-link" data-id="${r.id}">remove</button></li>`,
  );
  return (
    `<ol class="resources personal">${rows.join("")}</ol>` +
    `<form data-form="add-personal-link">` +
    `<input name="title" placeholder="Label" required>` +
    `<input name="url" placeholder="https://..." required>` +
    `<button type="submit">Add link</button>` +
    `</form>`
  );
}

function renderQuickSearches(items: ResourceItem[]): string {
  const options = items.map(
    (r) => `<option value="${r.id}">${escapeHtml(r.title)}</option>`,
  );
  if (items.length === 0) {
    return `<p class="empty">No search engines selected.</p>`;
  }
  return (
    `<form data-form="quick-search">` +
    `<select name="engine">${options.join("")}</select>` +
    `<input name="q" placeholder="Search for...">` +
    `<button type="submit">Search</button>` +
    `</form>`
  );
}

function renderAwareness(profiles: ProfileItem[], form?: WindowForm): string {
  const rows = profiles.map(
    (p) =>
      `<li>Ranges: <code>${escapeHtml(p.ranges)}</code> ` +
      `(results to ${escapeHtml(p.delivery)}) ` +
      `<button data-action="ca-query" data-id="${p.id}">Search now</button> ` +
      `<button data-action="delete-profile" data-id="${p.id}">remove</button></li>`,
  );
  const from = form?.from_weeks_ago ?? 2;
  const to = form?.to_weeks_ago ?? 0;
  return (
    `<ul class="profiles">${rows.join("")}</ul>` +
    `<form data-form="ca-window">` +
    `<label>From <input name="from_weeks_ago" type="number" min="0" value="${from}"> weeks ago</label>` +
    `<label>To <input name="to_weeks_ago" type="number" min="0" value="${to}"> weeks ago</label>` +
    `</form>` +
    `<form data-form="save-profile">` +
    `<input name="ranges" placeholder="b - bd, z - zz" required>` +
    `<label><input type="radio" name="delivery" value="screen" checked> my screen</label>` +
    `<label><input type="radio" name="delivery" value="email"> my email</label>` +
    `<button type="submit">Save profile</button>` +
    `</form>`
  );
}

// ---------------------------------------------------------------------------
// Customization forms
// ---------------------------------------------------------------------------

export function renderCustomizeForm(form: CustomizationForm): string {
  const groups = form.groups.map((group) => {
    const boxes = group.items.map(
      (item) =>
        `<label><input type="checkbox" name="resource" value="${item.id}"` +
        `${item.checked ? " checked" : ""}> ${escapeHtml(item.title)}</label>`,
    );
    return (
      `<fieldset><legend>${escapeHtml(group.discipline)}</legend>` +
      `${boxes.join("<br>")}</fieldset>`
    );
  });
  const title = SECTION_TITLES[form.section] ?? form.section;
  return (
    `<div class="customize-view" data-customize="${form.section}">` +
    `<h2>Customize ${escapeHtml(title)}</h2>` +
    `<form data-form="customize" data-section="${form.section}">` +
    `${groups.join("")}` +
    `<button type="submit">Save</button> ` +
    `<button type="button" data-action="cancel">Cancel</button>` +
    `</form></div>`
  );
}

export function renderAwarenessCustomize(form: AwarenessForm): string {
  const rows = form.profiles.map(
    (p) =>
      `<li><code>${escapeHtml(p.ranges)}</code> (${escapeHtml(p.delivery)}) ` +
      `<button data-action="delete-profile" data-id="${p.id}">remove</button></li>`,
  );
  return (
    `<div class="customize-view" data-customize="current_awareness">` +
    `<h2>Customize Current Awareness</h2>` +
    `<ul class="profiles">${rows.join("")}</ul>` +
    `<form data-form="save-profile">` +
    `<input name="ranges" placeholder="b - bd, z - zz" required>` +
    `<label><input type="radio" name="delivery" value="screen" checked> my screen</label>` +
    `<label><input type="radio" name="delivery" value="email"> my email</label>` +
    `<button type="submit">Save profile</button>` +
    `</form>` +
    `<button data-action="cancel">Back</button>` +
    `</div>`
  );
}

export function renderAlertResult(result: AlertResult): string {
  const rows = result.items.map(
    (item) =>
      `<li><code>${escapeHtml(item.call_number)}</code> ` +
      `${escapeHtml(item.author)} &mdash; ` +
      `<a href="${escapeHtml(item.record_url)}" rel="noopener">${escapeHtml(item.title)}</a></li>`,
  );
  return (
    `<div class="alert-results">` +
    `<h3>New acquisitions (${result.items.length})</h3>` +
    `<ol>${rows.join("")}</ol></div>`
  );
}
