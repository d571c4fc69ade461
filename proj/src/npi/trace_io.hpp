#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "npi/trace.hpp"

namespace npi {

// JSON Lines trace files: one object per supervision step with keys
// trace_id, call_id, parent_call_id, depth, step, program, args, observation,
// out_program, out_args, ret. Program and argument symbols are written by
// name.
void write_trace_jsonl(std::ostream& os, Task task, const TraceNode& trace, int trace_id);
void write_traces_file(const std::string& path, Task task, const std::vector<TraceNode*>& traces);

std::vector<FlatRecord> read_traces_file(const std::string& path, Task task);

}  // namespace npi
