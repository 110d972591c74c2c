#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <pthread.h>
#include <vector>

#include "hvx/error.hpp"
#include "hvx/interp.hpp"
#include "hvx/value.hpp"

namespace hvx {

struct RunOptions {
  std::uint64_t compile_fuel = 1'000'000;  // per top-level form
  std::uint64_t run_fuel = Fuel::kUnlimited;
  std::uint64_t quantum = 100'000;  // steps between yields of a cooperative run
  std::uint32_t max_depth = 20'000;  // run-phase nesting limit
};

/// Fully expanded top-level forms produced by a compile world.
struct CompiledProgram {
  std::vector<Value> forms;
};

/// Expands every top-level form of `text` in a fresh compile-phase world.
/// Throws the first read or expansion error.
CompiledProgram compile_program(std::string_view text, const RunOptions& options = {});

struct ProgramResult {
  bool ok = false;
  Value value;  // value of the last top-level form
  std::string output;
  std::optional<Error> error;
  Phase phase = Phase::run;  // phase that failed, when !ok
  std::uint64_t steps = 0;   // run-phase steps consumed
};

/// Compiles `text` and evaluates the result to completion in a fresh
/// run-phase world.
ProgramResult run_program(std::string_view text, const RunOptions& options = {});

/// A run-phase evaluation that advances one quantum at a time on a worker
/// thread. Between quanta the worker is parked, so the owner can read output
/// or revoke the run; after stop() no further step executes.
class RunTask {
 public:
  RunTask(CompiledProgram program, RunOptions options);
  ~RunTask();
  RunTask(const RunTask&) = delete;
  RunTask& operator=(const RunTask&) = delete;

  /// Grants one quantum and blocks until the worker parks again or finishes.
  /// Returns true once the run is over.
  bool step();
  /// Runs to completion.
  void finish();
  /// Revokes the run. The worker unwinds with Error(stopped) at its current
  /// yield point without evaluating anything further.
  void stop();

  bool done() const;
  std::string take_output();
  const ProgramResult& result() const { return result_; }
  /// Steps executed so far.
  std::uint64_t steps() const;
  /// Run-phase world; only safe to inspect while the worker is parked or done.
  const Interpreter& world() const { return *world_; }

 private:
  void worker();
  void park();

  CompiledProgram program_;
  RunOptions options_;
  std::unique_ptr<Interpreter> world_;
  Fuel fuel_;
  ProgramResult result_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool granted_ = false;  // worker may run
  bool parked_ = true;    // worker waiting for a grant
  bool revoked_ = false;
  std::atomic<bool> cancel_{false};  // lets a running quantum end at its next step
  bool done_ = false;
  pthread_t thread_{};
  bool started_ = false;
};

}  // namespace hvx
