/** Cursor-based log polling.
 *
 * The service numbers records 1..N; fetching with from=cursor returns
 * only records with n > cursor plus the new cursor. The poller appends
 * monotonically, so re-fetching from the same cursor is idempotent and
 * a dropped connection loses nothing: resume from the stored cursor.
 */

import { ApiClient, LogPage, LogRecord } from "./api.js";

export class LogCursor {
  private cursor = 0;
  private finishedFlag = false;
  readonly records: LogRecord[] = [];
  header: Record<string, unknown> | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly runId: string,
  ) {}

  get next(): number {
    return this.cursor;
  }

  get finished(): boolean {
    return this.finishedFlag;
  }

  /** Fetch everything past the cursor; returns the records appended. */
  async poll(): Promise<LogRecord[]> {
    const page: LogPage = await this.api.fetchLog(this.runId, this.cursor);
    this.header = page.header;
    this.finishedFlag = page.finished;
    const fresh = page.records.filter((r) => r.n > this.cursor);
    for (const r of fresh) this.records.push(r);
    if (fresh.length > 0) this.cursor = page.next;
    return fresh;
  }

  /** Poll until the run reports finished (for full runs or drains). */
  async drain(): Promise<void> {
    await this.poll();
    while (!this.finishedFlag) {
      await this.poll();
    }
  }
}
