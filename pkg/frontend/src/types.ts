// Shapes of the documents the service returns. The client never derives
// state on its own: what the server sends is what gets rendered.

export interface Classification {
  mode: "proactive" | "reactive";
  agent: "human" | "computer";
}

export interface ResourceItem {
  id: string;
  title: string;
  url: string;
  description: string;
}

export interface MessageItem {
  body: string;
  updated_at: string | null;
}

export interface LibrarianItem {
  name: string;
  phone: string;
  email: string;
  role: string;
}

export interface ProfileItem {
  id: string;
  ranges: string;
  delivery: string;
}

export interface WindowForm {
  from_weeks_ago: number;
  to_weeks_ago: number;
  delivery_options: string[];
}

export interface SectionBlock {
  section: string;
  classification: Classification | null;
  customizable: boolean;
  customized?: boolean;
  items: unknown[];
  window_form?: WindowForm;
}

export interface PageUser {
  id: string;
  name: string;
  email: string;
  discipline_id: string;
  discipline: string;
  email_opt_in: boolean;
}

export interface PageDocument {
  user: PageUser;
  sections: SectionBlock[];
}

export interface FormItem extends ResourceItem {
  checked: boolean;
}

export interface FormGroup {
  discipline_id: string | null;
  discipline: string;
  items: FormItem[];
}

export interface CustomizationForm {
  section: string;
  selected: string[];
  groups: FormGroup[];
}

export interface AwarenessForm {
  section: string;
  profiles: ProfileItem[];
  delivery_options: string[];
}

export interface AlertResultItem {
  call_number: string;
  author: string;
  title: string;
  record_url: string;
}

export interface AlertResult {
  profile_id: string;
  window: {
    from_weeks_ago: number;
    to_weeks_ago: number;
    start: string;
    end: string;
  };
  items: AlertResultItem[];
}

export interface Discipline {
  id: string;
  name: string;
  description: string;
}

export interface AdminResource {
  id: string;
  kind: string;
  title: string;
  url: string;
  description: string;
  url_template: string | null;
  owner_user_id?: string | null;
  discipline_ids: string[];
}

export interface AdminLibrarian {
  id: string;
  name: string;
  phone: string;
  email: string;
  role: string;
  discipline_ids: string[];
}

export interface MassEmailReport {
  id: string;
  recipients: number;
  skipped_opt_out: number;
  failed: number;
  status: string;
}

export interface UsageReport {
  from: string | null;
  to: string | null;
  counters: Record<string, number>;
  distinct_users: number;
  malformed: number;
  total: number;
}
