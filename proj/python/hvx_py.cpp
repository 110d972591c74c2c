// Python bindings: one-shot runs, expansion, wire encoding, and a Session
// driven the same way an editor drives it.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hvx/corpus.hpp"
#include "hvx/program.hpp"
#include "hvx/reader.hpp"
#include "hvx/server.hpp"
#include "hvx/session.hpp"
#include "hvx/wire.hpp"

namespace py = pybind11;
using namespace hvx;

namespace {

py::object from_json(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json to_json(const py::object& o) { return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>()); }

py::dict result_dict(const ProgramResult& r) {
  py::dict d;
  d["ok"] = r.ok;
  d["value"] = r.ok ? py::object(py::str(print_datum(r.value))) : py::object(py::none());
  d["output"] = r.output;
  d["steps"] = r.steps;
  if (r.error) {
    d["error"] = from_json(error_to_json(*r.error));
    d["phase"] = std::string(phase_name(r.phase));
  }
  return d;
}

py::list edit_list(const EditOutcome& e) {
  py::list out;
  for (const auto& d : e.deltas) {
    py::dict x;
    x["span"] = from_json(span_to_json(d.span));
    x["replacement"] = d.replacement;
    out.append(x);
  }
  return out;
}

py::list diagnostics(const std::vector<Diagnostic>& ds) {
  py::list out;
  for (const auto& d : ds) out.append(from_json(diagnostic_to_json(d)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_hvx, m) {
  py::register_exception<Error>(m, "HvxError");

  m.def(
      "run",
      [](const std::string& text, std::uint64_t fuel) {
        RunOptions opts;
        if (fuel) opts.run_fuel = fuel;
        ProgramResult r;
        {
          py::gil_scoped_release release;
          r = run_program(text, opts);
        }
        return result_dict(r);
      },
      py::arg("text"), py::arg("fuel") = 0);

  m.def("expand", [](const std::string& text) {
    std::string out;
    for (const auto& f : compile_program(text).forms) out += print_datum(f) + "\n";
    return out;
  });

  m.def("read_print", [](const std::string& text) {
    std::vector<std::string> out;
    for (const auto& f : read_all(text)) out.push_back(print_datum(f));
    return out;
  });

  m.def("datum_to_json", [](const std::string& text) { return from_json(datum_to_json(read_one(text))); });
  m.def("json_to_datum", [](const py::object& o) { return print_datum(json_to_datum(to_json(o))); });
  m.def("corpus_dir", [] { return default_corpus_dir().string(); });

  py::class_<Session>(m, "Session")
      .def(py::init([](const std::string& text) { return std::make_unique<Session>(text); }))
      .def_property_readonly("text", &Session::text)
      .def_property_readonly("instances",
                             [](const Session& s) {
                               py::list out;
                               for (const auto& i : s.instances()) out.append(from_json(instance_to_json(i)));
                               return out;
                             })
      .def_property_readonly("diagnostics", [](const Session& s) { return diagnostics(s.diagnostics()); })
      .def("state",
           [](const Session& s, const std::string& id) -> py::object {
             auto v = s.state(id);
             return v ? py::object(py::str(print_datum(*v))) : py::object(py::none());
           })
      .def("render",
           [](Session& s) {
             py::list out;
             for (const auto& r : s.render_all()) out.append(from_json(render_to_json(r)));
             return out;
           })
      .def(
          "dispatch",
          [](Session& s, const std::string& handler, const std::optional<std::string>& payload) {
            return edit_list(s.dispatch({handler, payload ? read_one(*payload) : Value()}));
          },
          py::arg("handler"), py::arg("payload") = py::none())
      .def("set_state",
           [](Session& s, const std::string& id, const std::vector<std::string>& path, const std::string& value) {
             Vec p;
             for (const auto& k : path) p.push_back(read_one(k));
             return edit_list(s.set_state(id, p, read_one(value)));
           })
      .def("apply_text_edit",
           [](Session& s, std::size_t start, std::size_t end, const std::string& text) {
             return edit_list(s.apply_text_edit({start, end}, text));
           })
      .def("run", [](Session& s) { return result_dict(s.run()); });

  py::class_<Server>(m, "Server")
      .def(py::init<>())
      .def("handle", [](Server& s, const std::string& line) { return s.handle(line); })
      .def("pump", &Server::pump)
      .def_property_readonly("has_active_runs", &Server::has_active_runs);
}
