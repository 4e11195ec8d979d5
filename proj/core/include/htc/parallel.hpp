#pragma once

#include <functional>

namespace htc {

/// Environment variable read for the worker count; the CLI lets it override --workers.
inline constexpr const char* kWorkersEnv = "HTC_WORKERS";

/// requested > 0 is used as is; 0 means the environment override if set,
/// otherwise the hardware concurrency.
int resolve_workers(int requested);

/// Runs task(0) .. task(n_tasks - 1) on up to `workers` threads. Tasks are
/// independent and must write only to their own result slot, so the outcome
/// never depends on the schedule. The first exception is rethrown after all
/// threads have joined.
void parallel_for(int n_tasks, int workers, const std::function<void(int)>& task);

}  // namespace htc
