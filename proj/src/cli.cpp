#include "metaforge/cli.hpp"

#include "metaforge/compiler.hpp"
#include "metaforge/composition.hpp"
#include "metaforge/error.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/recommender.hpp"
#include "metaforge/service.hpp"
#include "metaforge/template_io.hpp"
#include "metaforge/terminology.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace metaforge {
namespace {

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error(errc::io_error, "cannot write " + file.string());
}

std::vector<fs::path> json_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(errc::io_error, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

// Errors from a file get the file name in front of the message.
template <typename F>
auto in_file(const fs::path& file, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), file.string() + ": " + e.what(), e.path(), e.ids());
  }
}

/// The template plus any elements and fields found in --library.
ResolvedTemplate load_template(const fs::path& file, const std::string& library) {
  const Template t = in_file(file, [&] { return parse_template(read_file(file)); });
  std::map<ResourceId, Template> known;
  if (!library.empty())
    for (const auto& f : json_files(library)) {
      Template lib = in_file(f, [&] { return parse_template(read_file(f)); });
      known.emplace(lib.id, std::move(lib));
    }
  known.insert_or_assign(t.id, t);
  TemplateLookup lookup = [&known](const ResourceId& id) -> std::optional<Template> {
    auto it = known.find(id);
    if (it == known.end()) return std::nullopt;
    return it->second;
  };
  return in_file(file, [&] { return resolve_composition(t, lookup); });
}

MetadataInstance load_instance(const fs::path& file) {
  return in_file(file, [&] { return parse_instance(read_file(file)); });
}

void print_error(std::ostream& err, const Error& e) { err << dump_canonical(error_body(e)); }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"metaforge: metadata templates, validation, export and value suggestions"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string library;

  // compile
  auto* compile_cmd = app.add_subcommand("compile", "Compile a template to JSON Schema");
  std::string compile_template, compile_output;
  compile_cmd->add_option("template", compile_template, "Template document")->required();
  compile_cmd->add_option("-o,--output", compile_output, "Write the schema here instead of stdout");
  compile_cmd->add_option("--library", library, "Directory of elements and fields used by references");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Validate instances against a template");
  std::string validate_template;
  std::vector<std::string> validate_instances, value_set_files;
  bool offline = false;
  validate_cmd->add_option("--template", validate_template, "Template document")->required();
  validate_cmd->add_option("instances", validate_instances, "Instance documents")->required();
  validate_cmd->add_flag("--offline", offline, "Skip ontology term checks, reporting each as a warning");
  validate_cmd->add_option("--value-set", value_set_files, "Value set document usable by term constraints");
  validate_cmd->add_option("--library", library, "Directory of elements and fields used by references");

  // export
  auto* export_cmd = app.add_subcommand("export", "Export an instance as RDF");
  std::string export_format, export_template, export_instance;
  export_cmd->add_option("--format", export_format, "Output format")->required()->check(CLI::IsMember({"ntriples"}));
  export_cmd->add_option("--template", export_template, "Template document")->required();
  export_cmd->add_option("instance", export_instance, "Instance document")->required();
  export_cmd->add_option("--library", library, "Directory of elements and fields used by references");

  // recommend
  auto* recommend_cmd = app.add_subcommand("recommend", "Suggest values for a field from a corpus");
  std::string corpus, recommend_template, target;
  std::vector<std::string> context_args;
  std::size_t k = 5;
  std::uint64_t min_support = 1;
  recommend_cmd->add_option("--corpus", corpus, "Directory of instance documents")->required();
  recommend_cmd->add_option("--template", recommend_template, "Template document")->required();
  recommend_cmd->add_option("--target", target, "Path of the field to fill")->required();
  recommend_cmd->add_option("--context", context_args, "Filled field as path=value");
  recommend_cmd->add_option("-k", k, "Number of suggestions");
  recommend_cmd->add_option("--min-support", min_support, "Minimum co-occurrence count");
  recommend_cmd->add_option("--library", library, "Directory of elements and fields used by references");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the REST service");
  int port = 0;
  std::string host = "127.0.0.1", data_dir;
  serve_cmd->add_option("--port", port, "Port (default METAFORGE_PORT or 9090)");
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--data-dir", data_dir, "Repository directory (default METAFORGE_DATA_DIR or ./data)");

  // user add
  auto* user_cmd = app.add_subcommand("user", "Manage users");
  user_cmd->require_subcommand(1);
  auto* user_add = user_cmd->add_subcommand("add", "Create a user and print its API key");
  std::string user_name;
  user_add->add_option("name", user_name, "User name")->required();
  user_add->add_option("--data-dir", data_dir, "Repository directory (default METAFORGE_DATA_DIR or ./data)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << dump_canonical(Json{{"error", "USAGE"}, {"message", e.what()}});
    return exit_code::usage;
  }

  try {
    if (compile_cmd->parsed()) {
      const std::string schema = compile(load_template(compile_template, library)).schemaDoc;
      if (compile_output.empty()) out << schema;
      else write_file(compile_output, schema);
      return exit_code::ok;
    }

    if (validate_cmd->parsed()) {
      const ResolvedTemplate rt = load_template(validate_template, library);
      auto store = std::make_shared<InMemoryTermStore>();
      for (const auto& f : value_set_files)
        store->add_value_set(in_file(f, [&] { return value_set_from_json(parse_json(read_file(f))); }), std::nullopt);
      TerminologyService terminology(TerminologyConfig::from_env(), store);
      const MembershipOracle oracle = offline ? MembershipOracle{} : terminology.membership_oracle();
      const Validator validator(rt);
      bool all_valid = true;
      for (const auto& f : validate_instances) {
        const ValidationReport report = validator.validate(load_instance(f), oracle);
        all_valid = all_valid && report.valid;
        out << validation_body(report);
      }
      return all_valid ? exit_code::ok : exit_code::invalid;
    }

    if (export_cmd->parsed()) {
      out << export_ntriples(load_template(export_template, library), load_instance(export_instance));
      return exit_code::ok;
    }

    if (recommend_cmd->parsed()) {
      const ResolvedTemplate rt = load_template(recommend_template, library);
      std::vector<MetadataInstance> instances;
      for (const auto& f : json_files(corpus)) instances.push_back(load_instance(f));
      const CorpusIndex idx = index_corpus(rt.id(), instances);
      std::vector<ContextPair> context;
      for (const auto& c : context_args) {
        const auto eq = c.find('=');
        if (eq == std::string::npos || eq == 0) {
          err << dump_canonical(Json{{"error", "USAGE"}, {"message", "--context takes path=value, got '" + c + "'"}});
          return exit_code::usage;
        }
        context.push_back(context_pair(&rt.tree(), c.substr(0, eq), c.substr(eq + 1)));
      }
      out << suggestions_body(suggest(idx, target, context, k, min_support));
      return exit_code::ok;
    }

    if (serve_cmd->parsed()) {
      if (!data_dir.empty()) setenv("METAFORGE_DATA_DIR", data_dir.c_str(), 1);
      if (port == 0) {
        const char* env = std::getenv("METAFORGE_PORT");
        port = env != nullptr && *env != '\0' ? std::atoi(env) : 9090;
      }
      Service service(ServiceConfig::from_env());
      ServiceServer server(service);
      server.start(port, host);
      std::cerr << "metaforge listening on " << server.url() << std::endl;
      server.wait();
      return exit_code::ok;
    }

    if (user_add->parsed()) {
      if (data_dir.empty()) {
        const char* env = std::getenv("METAFORGE_DATA_DIR");
        data_dir = env != nullptr && *env != '\0' ? env : "data";
      }
      Repository repo(data_dir);
      out << dump_canonical(user_to_json(repo.create_user(user_name)));
      return exit_code::ok;
    }
  } catch (const Error& e) {
    print_error(err, e);
    return exit_code::failure;
  } catch (const std::exception& e) {
    print_error(err, Error(errc::io_error, e.what()));
    return exit_code::failure;
  }
  return exit_code::usage;
}

}  // namespace metaforge
