import type { ApiClient } from './api';
import type { Job } from './types';

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  signal?: AbortSignal;
}

/**
 * Poll a generation job until it reaches a terminal state. Resolves with the
 * finished job (even stale ones — staleness is the caller's decision) and
 * rejects on failure, timeout, or abort.
 */
export function pollJob(api: ApiClient, jobId: string, options: PollOptions = {}): Promise<Job> {
  const { intervalMs = 50, timeoutMs = 15000, signal } = options;
  return new Promise((resolve, reject) => {
    const deadline = Date.now() + timeoutMs;
    const tick = async () => {
      if (signal?.aborted) {
        reject(new Error('polling aborted'));
        return;
      }
      try {
        const job = await api.getJob(jobId, { signal });
        if (job.status === 'done') {
          resolve(job);
          return;
        }
        if (job.status === 'failed') {
          reject(new Error(job.error ?? 'job failed'));
          return;
        }
        if (Date.now() > deadline) {
          reject(new Error(`job ${jobId} timed out`));
          return;
        }
        setTimeout(tick, intervalMs);
      } catch (err) {
        reject(err);
      }
    };
    tick();
  });
}
