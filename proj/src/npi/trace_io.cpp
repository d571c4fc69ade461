#include "npi/trace_io.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>

namespace npi {

void write_trace_jsonl(std::ostream& os, Task task, const TraceNode& trace, int trace_id) {
    const TaskSpec& spec = task_spec(task);
    for (const FlatRecord& r : flatten_trace(trace, trace_id)) {
        nlohmann::json j;
        j["trace_id"] = r.trace_id;
        j["call_id"] = r.call_id;
        j["parent_call_id"] = r.parent_call_id;
        j["depth"] = r.depth;
        j["step"] = r.step;
        j["program"] = spec.prog_name(r.call.prog);
        j["args"] = {spec.arg_name(r.call.args[0]), spec.arg_name(r.call.args[1]),
                     spec.arg_name(r.call.args[2])};
        j["observation"] = r.obs.slots;
        j["out_program"] = spec.prog_name(r.out.next.prog);
        j["out_args"] = {spec.arg_name(r.out.next.args[0]), spec.arg_name(r.out.next.args[1]),
                         spec.arg_name(r.out.next.args[2])};
        j["ret"] = r.out.ret ? 1 : 0;
        os << j.dump() << '\n';
    }
}

void write_traces_file(const std::string& path, Task task,
                       const std::vector<TraceNode*>& traces) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (size_t i = 0; i < traces.size(); ++i) {
        write_trace_jsonl(os, task, *traces[i], static_cast<int>(i));
    }
}

std::vector<FlatRecord> read_traces_file(const std::string& path, Task task) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    const TaskSpec& spec = task_spec(task);
    std::vector<FlatRecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        FlatRecord r;
        r.trace_id = j.at("trace_id").get<int>();
        r.call_id = j.at("call_id").get<int>();
        r.parent_call_id = j.at("parent_call_id").get<int>();
        r.depth = j.at("depth").get<int>();
        r.step = j.at("step").get<int>();
        auto prog = [&](const std::string& name) {
            int id = spec.prog_id(name);
            if (id < 0) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": unknown program " + name);
            }
            return id;
        };
        auto arg = [&](const std::string& name) {
            int id = spec.arg_id(name);
            if (id < 0) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": unknown argument " + name);
            }
            return id;
        };
        r.call.prog = prog(j.at("program").get<std::string>());
        for (int k = 0; k < kArgSlots; ++k) {
            r.call.args[k] = arg(j.at("args").at(k).get<std::string>());
        }
        r.obs.slots = j.at("observation").get<std::vector<uint8_t>>();
        r.out.next.prog = prog(j.at("out_program").get<std::string>());
        for (int k = 0; k < kArgSlots; ++k) {
            r.out.next.args[k] = arg(j.at("out_args").at(k).get<std::string>());
        }
        r.out.ret = j.at("ret").get<int>() != 0;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace npi
