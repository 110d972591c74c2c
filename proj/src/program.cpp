#include "hvx/program.hpp"

#include "hvx/reader.hpp"

namespace hvx {

CompiledProgram compile_program(std::string_view text, const RunOptions& options) {
  std::vector<Value> forms = read_all(text);
  InterpreterOptions io;
  io.expand_fuel = options.compile_fuel;
  Interpreter world(Phase::compile, io);
  CompiledProgram out;
  for (const auto& lf : world.load(forms, true)) {
    if (lf.error) throw *lf.error;
    out.forms.push_back(lf.expanded);
  }
  return out;
}

ProgramResult run_program(std::string_view text, const RunOptions& options) {
  ProgramResult result;
  CompiledProgram program;
  try {
    program = compile_program(text, options);
  } catch (const Error& e) {
    result.error = e;
    result.phase = e.kind() == ErrorKind::read ? Phase::edit : Phase::compile;
    return result;
  }
  RunTask task(std::move(program), options);
  task.finish();
  result = task.result();
  result.output = task.take_output();
  return result;
}

namespace {

// The run world recurses on the native stack, so its thread gets a stack
// sized for RunOptions::max_depth.
constexpr std::size_t kRunStackBytes = std::size_t{256} << 20;

}  // namespace

RunTask::RunTask(CompiledProgram program, RunOptions options)
    : program_(std::move(program)),
      options_(options),
      world_(std::make_unique<Interpreter>(Phase::run, InterpreterOptions{0, options.max_depth})),
      fuel_(options.run_fuel) {
  fuel_.set_quantum(options_.quantum == 0 ? 1 : options_.quantum, [this] { park(); });
  fuel_.set_cancel(&cancel_);
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, kRunStackBytes);
  auto entry = [](void* self) -> void* {
    static_cast<RunTask*>(self)->worker();
    return nullptr;
  };
  int rc = pthread_create(&thread_, &attr, entry, this);
  pthread_attr_destroy(&attr);
  if (rc != 0) throw Error(ErrorKind::runtime, "cannot start run thread");
  started_ = true;
}

RunTask::~RunTask() {
  stop();
  if (started_) pthread_join(thread_, nullptr);
}

void RunTask::park() {
  std::unique_lock lock(mu_);
  granted_ = false;
  parked_ = true;
  cv_.notify_all();
  cv_.wait(lock, [this] { return granted_ || revoked_; });
  if (revoked_) throw Error(ErrorKind::stopped, "run stopped");
  parked_ = false;
}

void RunTask::worker() {
  try {
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return granted_ || revoked_; });
      if (revoked_) throw Error(ErrorKind::stopped, "run stopped");
      parked_ = false;
    }
    for (const auto& form : program_.forms) result_.value = world_->eval(form, fuel_);
    result_.ok = true;
  } catch (const Error& e) {
    result_.error = e;
    result_.phase = Phase::run;
  } catch (const std::exception& e) {
    result_.error = Error(ErrorKind::runtime, e.what());
  }
  std::lock_guard lock(mu_);
  result_.steps = fuel_.used();
  done_ = true;
  parked_ = true;
  cv_.notify_all();
}

bool RunTask::step() {
  std::unique_lock lock(mu_);
  if (done_) return true;
  if (revoked_) {
    cv_.wait(lock, [this] { return done_; });
    return true;
  }
  granted_ = true;
  parked_ = false;
  cv_.notify_all();
  cv_.wait(lock, [this] { return done_ || (parked_ && !granted_); });
  return done_;
}

void RunTask::finish() {
  while (!step()) {
  }
}

void RunTask::stop() {
  std::unique_lock lock(mu_);
  if (done_) return;
  revoked_ = true;
  cancel_ = true;
  cv_.notify_all();
  cv_.wait(lock, [this] { return done_; });
}

bool RunTask::done() const {
  std::lock_guard lock(mu_);
  return done_;
}

std::string RunTask::take_output() {
  std::lock_guard lock(mu_);
  return world_->take_output();
}

std::uint64_t RunTask::steps() const {
  std::lock_guard lock(mu_);
  return done_ ? result_.steps : fuel_.used();
}

}  // namespace hvx
