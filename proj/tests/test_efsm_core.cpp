#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "splanner/efsm/model.hpp"
#include "splanner/efsm/raw.hpp"
#include "splanner/efsm/semantics.hpp"
#include "splanner/efsm/validate.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace splanner;
using namespace splanner::efsm;

namespace {

// A small well-formed description used as the base for fault injection.
RawApp small_raw_app() {
  RawApp app;
  app.app_id = "camera";
  app.states = {"home", "settings"};
  app.initial_states = {"home"};

  RawVar var;
  var.name = "video_mode";
  var.is_bool = true;
  var.initial = "false";
  app.vars.push_back(var);

  RawFunction photo;
  photo.name = "take_photo";
  photo.description = "Take a photo.";
  app.functions.push_back(photo);

  RawFunction video;
  video.name = "record_video";
  video.params = {"duration"};
  video.description = "Record a video of {duration}.";
  app.functions.push_back(video);

  RawTransition nav;
  nav.id = "t1";
  nav.source = "home";
  nav.target = "settings";
  nav.event_text = "Open the camera settings.";
  app.transitions.push_back(nav);

  RawTransition shoot;
  shoot.id = "t2";
  shoot.source = "home";
  shoot.target = "home";
  shoot.event_text = "Tap the shutter button.";
  shoot.guard.push_back({"video_mode", true, "false", {}});
  shoot.action = RawAction{"take_photo", {}, false, {}};
  app.transitions.push_back(shoot);

  RawTransition record;
  record.id = "t3";
  record.source = "home";
  record.target = "home";
  record.event_text = "Record for {duration}.";
  record.guard.push_back({"video_mode", true, "true", {}});
  record.action = RawAction{"record_video", {}, false, {}};
  app.transitions.push_back(record);

  RawTransition toggle;
  toggle.id = "t4";
  toggle.source = "settings";
  toggle.target = "settings";
  toggle.event_text = "Flip the video switch.";
  toggle.update.push_back({"video_mode", "true", {}});
  app.transitions.push_back(toggle);

  return app;
}

bool has_code(const std::vector<Diagnostic>& diags, DiagCode code) {
  return std::any_of(diags.begin(), diags.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

size_t count_errors(const std::vector<Diagnostic>& diags) {
  return static_cast<size_t>(
      std::count_if(diags.begin(), diags.end(),
                    [](const Diagnostic& d) { return d.is_error(); }));
}

Valuation make_valuation(std::vector<uint8_t> values) {
  return Valuation(std::move(values));
}

}  // namespace

TEST_CASE("camera fixture validates into the expected machine") {
  auto kb = testsupport::load_fixture_kb();
  const Efsm& m = testsupport::camera(kb);

  CHECK(m.app_id == "camera");
  CHECK(m.states == std::vector<std::string>{"home", "settings"});
  CHECK(m.initial_state() == "home");

  REQUIRE(m.vars.size() == 1);
  CHECK(m.vars[0].name == "video_mode");
  CHECK(m.vars[0].is_bool);
  CHECK(m.vars[0].initial() == "false");

  REQUIRE(m.functions.size() == 2);
  CHECK(m.functions[0].name == "take_photo");
  CHECK(m.functions[0].params.empty());
  CHECK(m.functions[1].name == "record_video");
  CHECK(m.functions[1].params == std::vector<std::string>{"duration"});

  REQUIRE(m.transitions.size() == 6);
  CHECK(m.transitions[0].kind() == TransitionKind::Navigation);
  CHECK(m.transitions[1].kind() == TransitionKind::Configuration);
  CHECK(m.transitions[2].kind() == TransitionKind::FunctionExecution);
  CHECK(m.transitions[3].kind() == TransitionKind::FunctionExecution);
  CHECK(m.transitions[4].kind() == TransitionKind::Navigation);
  CHECK(m.transitions[5].kind() == TransitionKind::Configuration);
}

TEST_CASE("transition classification covers exactly the three kinds plus combined") {
  RawApp app = small_raw_app();
  RawTransition both;
  both.id = "t5";
  both.source = "home";
  both.target = "home";
  both.event_text = "Shoot and flag it.";
  both.update.push_back({"video_mode", "true", {}});
  both.action = RawAction{"take_photo", {}, false, {}};
  app.transitions.push_back(both);

  auto result = validate_efsm(app);
  REQUIRE(result.ok());
  const auto& ts = result.machine->transitions;
  CHECK(ts[0].kind() == TransitionKind::Navigation);
  CHECK(ts[1].kind() == TransitionKind::FunctionExecution);
  CHECK(ts[3].kind() == TransitionKind::Configuration);
  CHECK(ts[4].kind() == TransitionKind::Combined);
}

TEST_CASE("initial state must be declared") {
  RawApp app = small_raw_app();
  app.initial_states = {"nowhere"};
  auto result = validate_efsm(app);
  CHECK(!result.ok());
  CHECK(has_code(result.diagnostics, DiagCode::NO_INITIAL_STATE));
}

TEST_CASE("exactly one initial state must be marked") {
  RawApp none = small_raw_app();
  none.initial_states.clear();
  CHECK(has_code(validate_efsm(none).diagnostics, DiagCode::NO_INITIAL_STATE));

  RawApp two = small_raw_app();
  two.initial_states = {"home", "settings"};
  CHECK(has_code(validate_efsm(two).diagnostics, DiagCode::NO_INITIAL_STATE));
}

TEST_CASE("guard on an undeclared variable names the transition") {
  RawApp app = small_raw_app();
  app.transitions[0].guard.push_back({"wifi", true, "true", {}});
  auto result = validate_efsm(app);
  CHECK(!result.ok());
  REQUIRE(has_code(result.diagnostics, DiagCode::UNKNOWN_VAR));
  for (const auto& d : result.diagnostics) {
    if (d.code == DiagCode::UNKNOWN_VAR) CHECK(d.location == "t1");
  }
}

TEST_CASE("unknown states in transitions are reported") {
  RawApp app = small_raw_app();
  app.transitions[0].source = "lobby";
  app.transitions[2].target = "vault";
  auto result = validate_efsm(app);
  CHECK(!result.ok());
  size_t unknown_states = 0;
  for (const auto& d : result.diagnostics) {
    if (d.code == DiagCode::UNKNOWN_STATE) ++unknown_states;
  }
  CHECK(unknown_states == 2);
}

TEST_CASE("action must name a declared function") {
  RawApp app = small_raw_app();
  app.transitions[1].action->function = "send_fax";
  auto result = validate_efsm(app);
  CHECK(!result.ok());
  CHECK(has_code(result.diagnostics, DiagCode::UNKNOWN_FUNCTION));
}

TEST_CASE("domain mismatches are reported for initials, guards and updates") {
  RawApp bad_initial = small_raw_app();
  bad_initial.vars[0].initial = "maybe";
  CHECK(has_code(validate_efsm(bad_initial).diagnostics, DiagCode::DOMAIN_MISMATCH));

  RawApp bad_guard = small_raw_app();
  bad_guard.transitions[1].guard[0].literal = "sideways";
  CHECK(has_code(validate_efsm(bad_guard).diagnostics, DiagCode::DOMAIN_MISMATCH));

  RawApp bad_update = small_raw_app();
  bad_update.transitions[3].update[0].literal = "sideways";
  CHECK(has_code(validate_efsm(bad_update).diagnostics, DiagCode::DOMAIN_MISMATCH));
}

TEST_CASE("enum domains need 2..64 pairwise distinct values") {
  RawApp one_value = small_raw_app();
  one_value.vars.push_back({"mode", false, {"only"}, "only", {}});
  CHECK(has_code(validate_efsm(one_value).diagnostics, DiagCode::DOMAIN_MISMATCH));

  RawApp too_many = small_raw_app();
  RawVar big;
  big.name = "big";
  big.is_bool = false;
  for (int i = 0; i < 65; ++i) big.enum_values.push_back("e" + std::to_string(i));
  big.initial = "e0";
  too_many.vars.push_back(big);
  CHECK(has_code(validate_efsm(too_many).diagnostics, DiagCode::DOMAIN_MISMATCH));

  RawApp at_limit = small_raw_app();
  big.enum_values.pop_back();
  at_limit.vars.push_back(big);
  CHECK(validate_efsm(at_limit).ok());

  RawApp repeated = small_raw_app();
  repeated.vars.push_back({"mode", false, {"on", "on"}, "on", {}});
  CHECK(has_code(validate_efsm(repeated).diagnostics, DiagCode::DUPLICATE_NAME));
}

TEST_CASE("duplicate names are reported per namespace") {
  RawApp dup_state = small_raw_app();
  dup_state.states.push_back("home");
  CHECK(has_code(validate_efsm(dup_state).diagnostics, DiagCode::DUPLICATE_NAME));

  RawApp dup_var = small_raw_app();
  dup_var.vars.push_back(dup_var.vars[0]);
  CHECK(has_code(validate_efsm(dup_var).diagnostics, DiagCode::DUPLICATE_NAME));

  RawApp dup_fn = small_raw_app();
  dup_fn.functions.push_back(dup_fn.functions[0]);
  CHECK(has_code(validate_efsm(dup_fn).diagnostics, DiagCode::DUPLICATE_NAME));

  RawApp dup_transition = small_raw_app();
  dup_transition.transitions[2].id = "t1";
  CHECK(has_code(validate_efsm(dup_transition).diagnostics, DiagCode::DUPLICATE_NAME));

  RawApp dup_param = small_raw_app();
  dup_param.functions[1].params = {"duration", "duration"};
  CHECK(has_code(validate_efsm(dup_param).diagnostics, DiagCode::DUPLICATE_NAME));

  RawApp dup_assign = small_raw_app();
  dup_assign.transitions[3].update.push_back({"video_mode", "false", {}});
  CHECK(has_code(validate_efsm(dup_assign).diagnostics, DiagCode::DUPLICATE_NAME));
}

TEST_CASE("event placeholders must match the action's parameters") {
  RawApp no_action = small_raw_app();
  no_action.transitions[0].event_text = "Open {menu}.";
  CHECK(has_code(validate_efsm(no_action).diagnostics, DiagCode::BAD_PLACEHOLDER));

  RawApp wrong_name = small_raw_app();
  wrong_name.transitions[2].event_text = "Record for {length}.";
  CHECK(has_code(validate_efsm(wrong_name).diagnostics, DiagCode::BAD_PLACEHOLDER));
}

TEST_CASE("every violation is reported, not just the first") {
  RawApp app = small_raw_app();
  app.transitions[0].source = "lobby";                     // UNKNOWN_STATE
  app.transitions[1].guard[0].var = "wifi";                // UNKNOWN_VAR
  app.transitions[2].action->function = "send_fax";        // UNKNOWN_FUNCTION
  app.vars[0].initial = "maybe";                           // DOMAIN_MISMATCH
  auto result = validate_efsm(app);
  CHECK(!result.ok());
  CHECK(count_errors(result.diagnostics) >= 4);
  CHECK(has_code(result.diagnostics, DiagCode::UNKNOWN_STATE));
  CHECK(has_code(result.diagnostics, DiagCode::UNKNOWN_VAR));
  CHECK(has_code(result.diagnostics, DiagCode::UNKNOWN_FUNCTION));
  CHECK(has_code(result.diagnostics, DiagCode::DOMAIN_MISMATCH));
}

TEST_CASE("a machine without functions validates with a warning") {
  RawApp app = small_raw_app();
  app.functions.clear();
  app.transitions.erase(app.transitions.begin() + 1, app.transitions.begin() + 3);
  auto result = validate_efsm(app);
  CHECK(result.ok());
  REQUIRE(has_code(result.diagnostics, DiagCode::NO_FUNCTIONS));
  for (const auto& d : result.diagnostics) {
    if (d.code == DiagCode::NO_FUNCTIONS) CHECK(!d.is_error());
  }
}

TEST_CASE("huge valuation spaces earn a warning but stay valid") {
  RawApp app = small_raw_app();
  for (int i = 0; i < 17; ++i) {
    app.vars.push_back({"w" + std::to_string(i), true, {}, "false", {}});
  }
  auto result = validate_efsm(app);
  CHECK(result.ok());
  CHECK(has_code(result.diagnostics, DiagCode::VALUATION_SPACE_LARGE));
}

TEST_CASE("documents reject duplicate app ids") {
  ModelDocument doc;
  doc.apps.push_back(small_raw_app());
  doc.apps.push_back(small_raw_app());
  auto result = validate_document(doc);
  CHECK(!result.ok());
  CHECK(has_code(result.diagnostics, DiagCode::DUPLICATE_NAME));
}

TEST_CASE("guard evaluation: video_mode example") {
  auto kb = testsupport::load_fixture_kb();
  const Efsm& m = testsupport::camera(kb);
  Valuation initial = m.initial_valuation();  // video_mode = false

  const Transition* record = nullptr;
  for (const auto& t : m.transitions) {
    if (t.id == "t4") record = &t;
  }
  REQUIRE(record != nullptr);
  CHECK(!eval_guard(record->guard, initial));  // requires video_mode == true

  Valuation on = initial;
  on.set_value_index(0, 1);  // true
  CHECK(eval_guard(record->guard, on));
}

TEST_CASE("guard evaluation: empty conjunction is true") {
  Guard empty;
  CHECK(eval_guard(empty, make_valuation({})));
  CHECK(eval_guard(empty, make_valuation({0, 1, 1})));
}

TEST_CASE("guard evaluation: mixed atoms over every two-variable valuation") {
  // a in {x, z} at index 0, b in {y, w} at index 1; guard is a == x and b != y.
  Guard g;
  g.atoms.push_back({"a", true, "x", 0, 0});
  g.atoms.push_back({"b", false, "y", 1, 0});

  for (uint8_t a = 0; a < 2; ++a) {
    for (uint8_t b = 0; b < 2; ++b) {
      bool expected = (a == 0) && (b != 0);
      CHECK(eval_guard(g, make_valuation({a, b})) == expected);
    }
  }
  CHECK(!eval_guard(g, make_valuation({0, 0})));  // {a: x, b: y}
}

TEST_CASE("updates produce fresh valuations and leave the input untouched") {
  Update u;
  u.assignments.push_back({"video_mode", "false", 0, 0});

  Valuation before = make_valuation({1});  // true
  Valuation after = apply_update(u, before);
  CHECK(after == make_valuation({0}));
  CHECK(before == make_valuation({1}));

  Update empty;
  CHECK(apply_update(empty, before) == before);
}

TEST_CASE("updates apply in order and later assignments win across updates") {
  Update u;
  u.assignments.push_back({"m", "b", 0, 1});
  Valuation v = make_valuation({0, 2});
  Valuation once = apply_update(u, v);
  CHECK(once.value_index(0) == 1);
  CHECK(once.value_index(1) == 2);
  CHECK(apply_update(u, once) == once);  // idempotent single assignment
}

TEST_CASE("initial configuration of the camera fixture") {
  auto kb = testsupport::load_fixture_kb();
  const Efsm& m = testsupport::camera(kb);
  Configuration c = initial_configuration(m);
  CHECK(m.states[static_cast<size_t>(c.state_index)] == "home");
  CHECK(c.valuation == make_valuation({0}));  // video_mode = false
  CHECK(c.achieved == 0);
}

TEST_CASE("initial configuration with no variables and with an enum") {
  RawApp bare = small_raw_app();
  bare.vars.clear();
  bare.transitions[1].guard.clear();
  bare.transitions[2].guard.clear();
  bare.transitions.pop_back();  // t4 updates the removed variable
  auto bare_machine = validate_efsm(bare);
  REQUIRE(bare_machine.ok());
  Configuration c0 = initial_configuration(*bare_machine.machine);
  CHECK(c0.valuation.size() == 0);
  CHECK(c0.achieved == 0);

  RawApp week = small_raw_app();
  week.vars.push_back(
      {"day", false, {"mon", "tue", "wed", "thu", "fri", "sat", "sun"}, "mon", {}});
  auto week_machine = validate_efsm(week);
  REQUIRE(week_machine.ok());
  Configuration c1 = initial_configuration(*week_machine.machine);
  REQUIRE(c1.valuation.size() == 2);
  CHECK(week_machine.machine->vars[1].domain[c1.valuation.value_index(1)] == "mon");
}

TEST_CASE("placeholder extraction and substitution") {
  CHECK(extract_placeholders("Record a video of {duration}.") ==
        std::vector<std::string>{"duration"});
  CHECK(extract_placeholders("{a} then {b} then {a}") ==
        std::vector<std::string>{"a", "b", "a"});
  CHECK(extract_placeholders("no placeholders here").empty());
  CHECK(extract_placeholders("unbalanced {oops").empty());
  CHECK(extract_placeholders("empty {} braces").empty());

  std::string text = substitute_placeholders(
      "Record a video of {duration}.", {{"duration", "5s"}});
  CHECK(text == "Record a video of 5s.");
  CHECK(substitute_placeholders("{a}+{a}", {{"a", "1"}}) == "1+1");
  CHECK(substitute_placeholders("{missing}", {}) == "{missing}");
}

TEST_CASE("valuation_count multiplies domain sizes") {
  RawApp app = small_raw_app();
  app.vars.push_back({"mode", false, {"a", "b", "c"}, "a", {}});
  auto result = validate_efsm(app);
  REQUIRE(result.ok());
  CHECK(result.machine->valuation_count() == 6);  // 2 * 3
}

TEST_CASE("knowledge base lookup and insertion order") {
  auto kb = testsupport::load_fixture_kb();
  REQUIRE(kb.size() == 2);
  CHECK(kb.machines()[0].app_id == "camera");
  CHECK(kb.machines()[1].app_id == "contacts");
  CHECK(kb.find("camera") != nullptr);
  CHECK(kb.find("contacts") != nullptr);
  CHECK(kb.find("calendar") == nullptr);
}

TEST_CASE("property: random valid descriptions validate cleanly") {
  testsupport::Rng rng(2026'08'01);
  testsupport::GenOptions opt;
  opt.allow_enums = true;
  for (int i = 0; i < 200; ++i) {
    RawApp raw = testsupport::random_raw_app(rng, opt, "gen");
    auto result = validate_efsm(raw);
    if (!result.ok()) {
      for (const auto& d : result.diagnostics) MESSAGE(format_diagnostic(d));
    }
    REQUIRE(result.ok());
  }
}

TEST_CASE("property: a single injected fault produces exactly its diagnostic") {
  testsupport::Rng rng(2026'08'02);
  testsupport::GenOptions opt;
  opt.allow_enums = true;

  for (int i = 0; i < 300; ++i) {
    RawApp raw = testsupport::random_raw_app(rng, opt, "gen");
    DiagCode expected;
    switch (testsupport::pick(rng, 7)) {
      case 0:
        raw.transitions[0].source = "ghost_state";
        expected = DiagCode::UNKNOWN_STATE;
        break;
      case 1:
        raw.transitions[0].guard.push_back({"ghost_var", true, "true", {}});
        expected = DiagCode::UNKNOWN_VAR;
        break;
      case 2: {
        RawTransition t = raw.transitions[0];
        t.id = "t_fault";
        t.guard.clear();
        t.event_text = "Fault step.";
        t.action = RawAction{"ghost_fn", {}, false, {}};
        raw.transitions.push_back(t);
        expected = DiagCode::UNKNOWN_FUNCTION;
        break;
      }
      case 3:
        if (raw.vars.empty()) {
          raw.vars.push_back({"v_fault", true, {}, "sideways", {}});
        } else {
          raw.vars[0].initial = "out_of_domain";
        }
        expected = DiagCode::DOMAIN_MISMATCH;
        break;
      case 4:
        raw.states.push_back(raw.states[0]);
        expected = DiagCode::DUPLICATE_NAME;
        break;
      case 5:
        raw.transitions[0].event_text += " {ghost_slot}";
        expected = DiagCode::BAD_PLACEHOLDER;
        break;
      default:
        raw.initial_states.clear();
        expected = DiagCode::NO_INITIAL_STATE;
        break;
    }

    auto result = validate_efsm(raw);
    CHECK(!result.ok());
    CHECK(has_code(result.diagnostics, expected));
  }
}

TEST_CASE("property: eval_guard agrees with name-level evaluation everywhere") {
  testsupport::Rng rng(2026'08'03);
  testsupport::GenOptions opt;
  opt.allow_enums = true;

  for (int iter = 0; iter < 60; ++iter) {
    Efsm m = testsupport::random_efsm(rng, opt);

    // Walk the full valuation space (domains are tiny by construction).
    std::vector<Valuation> space;
    space.push_back(m.initial_valuation());
    for (size_t var = 0; var < m.vars.size(); ++var) {
      std::vector<Valuation> next;
      for (const auto& v : space) {
        for (uint8_t val = 0; val < m.vars[var].domain.size(); ++val) {
          Valuation copy = v;
          copy.set_value_index(var, val);
          next.push_back(copy);
        }
      }
      space = std::move(next);
    }

    for (const auto& t : m.transitions) {
      for (const auto& v : space) {
        bool expected = true;
        for (const auto& atom : t.guard.atoms) {
          size_t var = static_cast<size_t>(m.var_index(atom.var));
          const std::string& held = m.vars[var].domain[v.value_index(var)];
          bool eq = held == atom.literal;
          if (eq != atom.equals) expected = false;
        }
        CHECK(eval_guard(t.guard, v) == expected);
      }
    }
  }
}

TEST_CASE("property: updates touch exactly the assigned variables") {
  testsupport::Rng rng(2026'08'04);
  testsupport::GenOptions opt;
  opt.allow_enums = true;

  for (int iter = 0; iter < 100; ++iter) {
    Efsm m = testsupport::random_efsm(rng, opt);
    Valuation v = m.initial_valuation();
    for (size_t var = 0; var < m.vars.size(); ++var) {
      v.set_value_index(
          var, static_cast<uint8_t>(testsupport::pick(rng, m.vars[var].domain.size())));
    }

    for (const auto& t : m.transitions) {
      Valuation after = apply_update(t.update, v);
      for (size_t var = 0; var < m.vars.size(); ++var) {
        const Assignment* last = nullptr;
        for (const auto& a : t.update.assignments) {
          if (a.var_index == static_cast<int>(var)) last = &a;
        }
        if (last) {
          CHECK(m.vars[var].domain[after.value_index(var)] == last->literal);
        } else {
          CHECK(after.value_index(var) == v.value_index(var));
        }
      }
      CHECK(apply_update(t.update, after) == after);
    }
  }
}

TEST_CASE("property: transition iteration preserves declaration order") {
  testsupport::Rng rng(2026'08'05);
  for (int iter = 0; iter < 50; ++iter) {
    Efsm m = testsupport::random_efsm(rng);
    for (size_t i = 0; i < m.transitions.size(); ++i) {
      CHECK(m.transitions[i].id == "t" + std::to_string(i));
    }
  }
}
