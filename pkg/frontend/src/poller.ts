// Inbox polling loop: one GET per interval, exponential backoff while the
// network is down, reset on the first success.

import type { NotificationView } from "./types";

export interface PollerOptions {
  intervalMs?: number;
  maxBackoffMs?: number;
}

export const DEFAULT_POLL_INTERVAL_MS = 5_000;

export class InboxPoller {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private running = false;
  private failures = 0;
  readonly intervalMs: number;
  private readonly maxBackoffMs: number;

  constructor(
    private readonly fetchInbox: () => Promise<NotificationView[]>,
    private readonly onUpdate: (items: NotificationView[]) => void,
    options: PollerOptions = {},
  ) {
    this.intervalMs = options.intervalMs ?? DEFAULT_POLL_INTERVAL_MS;
    this.maxBackoffMs = options.maxBackoffMs ?? this.intervalMs * 8;
  }

  get currentDelay(): number {
    if (this.failures === 0) return this.intervalMs;
    return Math.min(this.intervalMs * 2 ** this.failures, this.maxBackoffMs);
  }

  start() {
    if (this.running) return;
    this.running = true;
    void this.tick();
  }

  stop() {
    this.running = false;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private schedule() {
    if (!this.running) return;
    this.timer = setTimeout(() => void this.tick(), this.currentDelay);
  }

  private async tick() {
    if (!this.running) return;
    try {
      const items = await this.fetchInbox();
      this.failures = 0;
      this.onUpdate(items);
    } catch {
      this.failures += 1;
    }
    this.schedule();
  }
}
