#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sf/exec/kernel.hpp"

namespace sf {

/// Fixed pool of data-parallel workers. The calling thread acts as worker 0.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return workers_; }
  /// Runs fn(worker, chunk) for every chunk in [0, chunks) and waits.
  void run(int chunks, const std::function<void(int, int)>& fn);

 private:
  void loop(int id);

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable wake_, done_;
  const std::function<void(int, int)>* job_ = nullptr;
  int chunks_ = 0;
  int next_ = 0;
  int active_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

/// Wall time of one node invocation.
struct NodeTiming {
  int state = 0;
  int node = 0;
  int instance = 0;  // position of this invocation among the node's invocations
  std::string name;
  double seconds = 0.0;
};

/// Schedule-faithful executor: runs each node's expanded loop nest over
/// FieldBuffers laid out per allocate_layout.
class Executor {
 public:
  explicit Executor(const DataflowGraph& graph, int workers = 1);
  ~Executor();

  /// Executes the unrolled trace. Optionally records per-invocation times.
  void run(FieldSet& fields, std::vector<NodeTiming>* timings = nullptr);

  /// Executes a single node once with the given scalar environment.
  void run_node(int state, int node, const std::map<std::string, double>& params, FieldSet& fields);

  const CompiledNode& compiled(int state, int node);
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  void exec_phase(const Invocation& inv, const PlanPhase& ph);

  const DataflowGraph& graph_;
  std::unique_ptr<WorkerPool> pool_;
  std::vector<TraceEntry> trace_;
  std::map<std::pair<int, int>, std::unique_ptr<CompiledNode>> cache_;
  std::vector<WorkerScratch> scratch_;
};

}  // namespace sf
