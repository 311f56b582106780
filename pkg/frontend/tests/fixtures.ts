// A well-formed page document as the service produces it.

import type { PageDocument } from "../src/types.js";

export const SECTION_ORDER = [
  "header",
  "global_message",
  "message_from_librarian",
  "your_librarians",
  "library_links",
  "university_links",
  "current_awareness",
  "personal_links",
  "quick_searches",
  "reference_shelf",
  "bibliographic_databases",
  "electronic_journals",
  "footer",
];

const CUSTOMIZABLE = new Set([
  "library_links",
  "university_links",
  "current_awareness",
  "personal_links",
  "quick_searches",
  "reference_shelf",
  "bibliographic_databases",
  "electronic_journals",
]);

export function samplePage(): PageDocument {
  return {
    user: {
      id: "u1",
      name: "Alice",
      email: "alice@example.test",
      discipline_id: "d1",
      discipline: "Philosophy",
      email_opt_in: true,
    },
    sections: SECTION_ORDER.map((section) => ({
      section,
      classification:
        section === "header" || section === "footer"
          ? null
          : { mode: "proactive" as const, agent: "computer" as const },
      customizable: CUSTOMIZABLE.has(section),
      items: sectionItems(section),
      ...(section === "current_awareness"
        ? {
            window_form: {
              from_weeks_ago: 2,
              to_weeks_ago: 0,
              delivery_options: ["screen", "email"],
            },
          }
        : {}),
    })),
  };
}

function sectionItems(section: string): unknown[] {
  switch (section) {
    case "header":
      return [{ user_name: "Alice", discipline: "Philosophy" }];
    case "footer":
      return [{ version: "0.1.0", contact: "libref@example.test" }];
    case "global_message":
      return [{ body: "Welcome back!", updated_at: "2026-03-11T09:00:00+00:00" }];
    case "message_from_librarian":
      return [{ body: "", updated_at: null }];
    case "your_librarians":
      return [
        {
          name: "Sasha Birch",
          phone: "555-0136",
          email: "sasha@example.test",
          role: "reference_librarian",
        },
      ];
    case "library_links":
      return [
        {
          id: "r1",
          title: "University Libraries home page",
          url: "https://example.test/home",
          description: "",
        },
      ];
    case "current_awareness":
      return [{ id: "p1", ranges: "B - BD, Z - ZZ", delivery: "email" }];
    case "quick_searches":
      return [
        { id: "r6", title: "Dictionary", url: "https://example.test/dict", description: "" },
      ];
    case "personal_links":
      return []; // present but empty
    default:
      return [
        {
          id: `x-${section}`,
          title: `Sample ${section}`,
          url: `https://example.test/${section}`,
          description: "",
        },
      ];
  }
}
