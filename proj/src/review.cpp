#include <httplib.h>

#include "quizforge/review.hpp"

#include <fmt/format.h>

#include "quizforge/assets.hpp"
#include "quizforge/text.hpp"

namespace quizforge::review {

namespace {

ApiResponse error(int status, const std::string& message, const std::vector<Violation>& violations = {}) {
  Json j = {{"error", message}};
  if (!violations.empty()) {
    Json v = Json::array();
    for (const auto& x : violations) v.push_back({{"path", x.path}, {"message", x.message}});
    j["violations"] = v;
  }
  return {status, j};
}

std::optional<std::string> string_field(const Json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (j.contains(k) && j[k].is_string()) return j[k].get<std::string>();
  }
  return std::nullopt;
}

}  // namespace

ReviewApi::ReviewApi(std::vector<QuizSet> sets, std::vector<SourceDocument> corpus,
                     const std::filesystem::path& store_path, std::function<UtcTime()> clock)
    : sets_(std::move(sets)), corpus_(std::move(corpus)), store_(store_path), clock_(std::move(clock)) {
  std::unordered_map<std::string, const SourceDocument*> docs;
  for (const auto& d : corpus_) docs.emplace(d.id, &d);
  std::vector<Violation> problems;
  for (std::size_t s = 0; s < sets_.size(); ++s) {
    auto it = docs.find(sets_[s].doc_id);
    if (it == docs.end()) {
      problems.push_back({fmt::format("sets[{}].doc_id", s), "not found in the corpus: " + sets_[s].doc_id});
      continue;
    }
    for (const auto& item : sets_[s].items) {
      if (!index_of_.emplace(item.item_id, items_.size()).second) {
        problems.push_back({fmt::format("sets[{}]", s), "duplicate item id " + item.item_id});
        continue;
      }
      items_.push_back({&item, &sets_[s], it->second});
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

Json ReviewApi::view(std::size_t index) const {
  const auto& e = items_[index];
  Json options = Json::array();
  for (const auto& o : e.item->options) options.push_back({{"label", std::string(1, o.label)}, {"text", o.text}});
  Json answer;
  if (const Option* c = e.item->correct_option()) {
    answer = {{"label", std::string(1, c->label)}, {"text", c->text}};
  } else {
    answer = {{"text", e.item->answer_text.value_or("")}};
  }
  return {{"item_id", e.item->item_id},
          {"index", index},
          {"doc_id", e.set->doc_id},
          {"kind", to_string(e.item->kind)},
          {"stem", e.item->stem},
          {"options", options},
          {"answer", answer},
          {"context",
           {{"title", e.doc->title},
            {"subject", e.doc->subject.slug()},
            {"subject_name", e.doc->subject.turkish_name()},
            {"body", e.doc->body}}}};
}

Json ReviewApi::progress_json(const eval::AnnotationStore::Snapshot& snap,
                              const std::optional<std::string>& annotator) const {
  std::size_t total = 0;
  std::map<std::string, std::size_t> per;
  std::vector<Annotation> effective;
  for (const auto& [key, a] : snap) {
    if (!index_of_.count(key.first)) continue;
    ++total;
    ++per[key.second];
    effective.push_back(a);
  }
  Json j = {{"items", items_.size()},
            {"total", total},
            {"annotators", per},
            {"distribution", eval::to_json(eval::aggregate_ratings(effective))}};
  if (annotator) {
    const std::size_t rated = per.count(*annotator) ? per.at(*annotator) : 0;
    j["annotator"] = {{"id", *annotator}, {"rated", rated}, {"remaining", items_.size() - rated}};
  }
  return j;
}

ApiResponse ReviewApi::next_item(const std::string& annotator) const {
  if (text::is_blank(annotator)) return error(400, "annotator is required");
  const auto snap = store_.snapshot();
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!snap->count({items_[i].item->item_id, annotator})) {
      return {200, {{"done", false}, {"item", view(i)}, {"progress", progress_json(*snap, annotator)}}};
    }
  }
  return {200, {{"done", true}, {"progress", progress_json(*snap, annotator)}}};
}

ApiResponse ReviewApi::item(const std::string& item_id) const {
  auto it = index_of_.find(item_id);
  if (it == index_of_.end()) return error(404, "unknown item " + item_id);
  return {200, view(it->second)};
}

ApiResponse ReviewApi::post_rating(std::string_view body) {
  Json j;
  try {
    j = Json::parse(body.begin(), body.end());
  } catch (const Json::parse_error&) {
    return error(400, "request body is not JSON");
  }
  if (!j.is_object()) return error(400, "request body must be an object");
  std::vector<Violation> v;
  const auto item_id = string_field(j, {"item_id", "item"});
  const auto annotator = string_field(j, {"annotator_id", "annotator"});
  const auto rating_text = string_field(j, {"rating"});
  std::optional<Rating> rating;
  if (!item_id) {
    v.push_back({"item_id", "required"});
  } else if (!index_of_.count(*item_id)) {
    v.push_back({"item_id", "unknown item " + *item_id});
  }
  if (!annotator || text::is_blank(*annotator)) v.push_back({"annotator_id", "required"});
  if (!rating_text) {
    v.push_back({"rating", "required"});
  } else if (!(rating = parse_rating(*rating_text))) {
    v.push_back({"rating", fmt::format("'{}' is not one of A, B, C, D, E", *rating_text)});
  }
  std::optional<std::string> comment;
  if (j.contains("comment") && !j["comment"].is_null()) {
    if (j["comment"].is_string()) {
      comment = j["comment"].get<std::string>();
    } else {
      v.push_back({"comment", "must be a string"});
    }
  }
  if (!v.empty()) return error(400, "invalid rating", v);

  Annotation a{*item_id, *annotator, *rating, {}, comment};
  {
    std::lock_guard lock(write_mu_);
    UtcTime ts = clock_();
    if (last_timestamp_ && ts <= *last_timestamp_) ts.value = last_timestamp_->value + std::chrono::milliseconds(1);
    a.timestamp = ts;
    try {
      store_.append(a);
    } catch (const ValidationError& e) {
      return error(400, "invalid rating", e.violations());
    }
    last_timestamp_ = ts;
  }
  return {201, {{"annotation", to_json(a)}, {"progress", progress_json(*store_.snapshot(), *annotator)}}};
}

ApiResponse ReviewApi::progress(const std::optional<std::string>& annotator) const {
  return {200, progress_json(*store_.snapshot(), annotator)};
}

ApiResponse ReviewApi::rubric() const { return {200, Json::parse(eval::rubric_json())}; }

// ---------------------------------------------------------------------------

struct ReviewServer::Impl {
  ReviewApi& api;
  httplib::Server server;
  bool bound = false;

  explicit Impl(ReviewApi& a) : api(a) {}
};

namespace {

void exclusive_port(socket_t sock) {
  int yes = 1;
  setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
}

void reply(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json; charset=utf-8");
}

}  // namespace

ReviewServer::ReviewServer(ReviewApi& api, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(api)) {
  auto& srv = impl_->server;
  srv.set_socket_options(exclusive_port);
  srv.Get("/api/items/next", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, impl_->api.next_item(req.get_param_value("annotator")));
  });
  srv.Get(R"(/api/items/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, impl_->api.item(httplib::detail::decode_url(req.matches[1].str(), false)));
  });
  srv.Post("/api/ratings", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, impl_->api.post_rating(req.body));
  });
  srv.Get("/api/progress", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> annotator;
    if (req.has_param("annotator")) annotator = req.get_param_value("annotator");
    reply(res, impl_->api.progress(annotator));
  });
  srv.Get("/api/rubric", [this](const httplib::Request&, httplib::Response& res) { reply(res, impl_->api.rubric()); });

  if (static_dir) {
    if (!srv.set_mount_point("/", static_dir->string())) {
      throw IoError(*static_dir, "static asset directory is not readable");
    }
  } else {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(*assets::find("review/index.html")), "text/html; charset=utf-8");
    });
  }
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  int bound = -1;
  if (port == 0) {
    bound = srv.bind_to_any_port(host);
  } else if (srv.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) throw IoError(fmt::format("{}:{}", host, port), "cannot bind (address in use or not permitted)");
  impl_->bound = true;
  return bound;
}

void ReviewServer::listen() { impl_->server.listen_after_bind(); }

int ReviewServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ReviewServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace quizforge::review
