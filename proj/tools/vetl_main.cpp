#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "vetl/explorer.hpp"
#include "vetl/headless.hpp"
#include "vetl/report.hpp"
#include "vetl/run_config.hpp"

namespace {

std::atomic<bool> g_stop{false};

void bind_run_flags(CLI::App* cmd, vetl::RunConfig& c, std::string& variant, std::string& config_file) {
  cmd->add_option("--config", config_file, "key = value file with flag defaults");
  cmd->add_option("--url", c.start_url, "start URL of the web app under test");
  cmd->add_option("--fixture", c.fixture, "bundled fixture to serve and explore instead of --url");
  cmd->add_option("--budget", c.action_budget, "web actions to execute")->capture_default_str();
  cmd->add_option("--variant", variant, "vetl | v1 | lv | l | random")->capture_default_str();
  cmd->add_option("--epsilon", c.epsilon, "exploration probability")->capture_default_str();
  cmd->add_option("--seed", c.rng_seed, "RNG seed")->capture_default_str();
  cmd->add_option("--model-endpoint", c.model_endpoint,
                  "chat-completions URL of the vision model, or script:<file.json>");
  cmd->add_option("--model-name", c.model_name)->capture_default_str();
  cmd->add_option("--model-supports-vision", c.model_supports_vision)->capture_default_str();
  cmd->add_option("--api-key-env", c.api_key_env, "environment variable holding the API key");
  cmd->add_option("--text-model-endpoint", c.text_model_endpoint, "text-only model for lv and l");
  cmd->add_option("--text-model-name", c.text_model_name)->capture_default_str();
  cmd->add_option("--model-timeout", c.model_timeout_s)->capture_default_str();
  cmd->add_option("--model-retries", c.model_max_retries)->capture_default_str();
  cmd->add_option("--temperature", c.temperature)->capture_default_str();
  cmd->add_option("--webdriver", c.webdriver, "WebDriver endpoint, or builtin")->capture_default_str();
  cmd->add_option("--out", c.output_dir, "run directory")->capture_default_str();
  cmd->add_option("--allow-origin", c.allowed_origins, "origins the explorer may stay on");
  cmd->add_option("--viewport-width", c.viewport.width)->capture_default_str();
  cmd->add_option("--viewport-height", c.viewport.height)->capture_default_str();
  cmd->add_option("--screenshots", c.save_screenshots)->capture_default_str();
}

int do_run(vetl::RunConfig& c, const std::string& variant) {
  auto v = vetl::parse_variant(variant);
  if (!v) {
    std::cerr << "error: unknown variant " << variant << "\n";
    return 2;
  }
  c.variant = *v;
  try {
    vetl::validate(c);
  } catch (const vetl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    auto m = vetl::explore::execute_run(c);
    std::cout << "actions " << m.actions << ", visited states " << m.visited_states.size()
              << ", discovered actions " << m.discovered_actions.size() << ", failures " << m.failures.size()
              << "\n";
    if (m.aborted) {
      std::cerr << "run aborted: " << m.abort_reason << "\n";
      return 1;
    }
    return 0;
  } catch (const vetl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// CLI11 only reads config files attached to the root app, so subcommand
// files are applied here. Flags given on the command line win.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;
    CLI::Option* op = cmd->get_option_no_throw("--" + item.name);
    if (!op) throw CLI::ConfigError::Extras(item.fullname());
    if (op->count() > 0) continue;
    op->add_result(item.inputs);
    op->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vision-guided web exploration"};
  app.require_subcommand(1);

  vetl::RunConfig run_cfg;
  std::string run_variant = "vetl";
  auto* run = app.add_subcommand("run", "explore a web app");
  std::string run_config_file;
  bind_run_flags(run, run_cfg, run_variant, run_config_file);
  run->add_option("--record", run_cfg.record_store, "append model exchanges to this store");
  run->add_option("--replay", run_cfg.replay_store, "answer model queries from this store");

  vetl::RunConfig replay_cfg;
  std::string replay_variant = "vetl";
  auto* replay = app.add_subcommand("replay", "re-run a session from a recorded exchange store");
  replay->add_option("store", replay_cfg.replay_store, "replay store")->required();
  std::string replay_config_file;
  bind_run_flags(replay, replay_cfg, replay_variant, replay_config_file);

  std::vector<std::string> report_dirs;
  std::string baseline;
  bool as_text = false, curve = false, verify = false;
  auto* report = app.add_subcommand("report", "summarize run directories");
  report->add_option("dirs", report_dirs, "run directories")->required();
  report->add_option("--baseline", baseline, "variant the gain column is relative to");
  report->add_flag("--text", as_text, "human-readable table instead of CSV");
  report->add_flag("--curve", curve, "exploration curve CSV of a single run");
  report->add_flag("--verify", verify, "re-fold traces and check metrics bookkeeping");

  auto* fixtures = app.add_subcommand("fixtures", "bundled fixture pages");
  fixtures->require_subcommand(1);
  int port = 8000;
  std::string root = vetl::fixture_root();
  auto* serve = fixtures->add_subcommand("serve", "serve fixtures over HTTP until interrupted");
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--root", root)->capture_default_str();

  try {
    app.parse(argc, argv);
    if (run->parsed()) apply_config_file(run, run_config_file);
    if (replay->parsed()) apply_config_file(replay, replay_config_file);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (run->parsed()) return do_run(run_cfg, run_variant);
  if (replay->parsed()) return do_run(replay_cfg, replay_variant);

  if (report->parsed()) {
    try {
      if (curve) {
        if (report_dirs.size() != 1) {
          std::cerr << "error: --curve takes exactly one run directory\n";
          return 2;
        }
        std::cout << vetl::report::curve_csv(vetl::report::load_run(report_dirs[0]));
        return 0;
      }
      std::vector<vetl::report::RunData> runs;
      for (const auto& d : report_dirs) runs.push_back(vetl::report::load_run(d));
      if (verify) {
        int bad = 0;
        for (const auto& r : runs) {
          auto v = vetl::report::verify_run(r);
          std::cout << (v.ok ? "ok   " : "FAIL ") << r.dir << "\n";
          for (const auto& p : v.problems) std::cout << "     " << p << "\n";
          bad += v.ok ? 0 : 1;
        }
        return bad ? 1 : 0;
      }
      auto s = vetl::report::summarize(runs, baseline);
      std::cout << (as_text ? vetl::report::to_text(s) : vetl::report::to_csv(s));
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  if (serve->parsed()) {
    try {
      vetl::headless::StaticServer server(root);
      server.start(port);
      std::cout << "serving " << root << " at " << server.base_url() << std::endl;
      std::signal(SIGINT, [](int) { g_stop = true; });
      std::signal(SIGTERM, [](int) { g_stop = true; });
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      server.stop();
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
