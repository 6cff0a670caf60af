#include "quizforge/mock_endpoint.hpp"

#include <fmt/format.h>

#include <array>
#include <optional>
#include <set>

#include "quizforge/io.hpp"
#include "quizforge/text.hpp"

namespace quizforge::generation {

namespace {

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      auto hex = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
      };
      const int hi = hex(s[i + 1]);
      const int lo = hex(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i] == '+' ? ' ' : s[i]);
  }
  return out;
}

int int_param(const std::map<std::string, std::string>& params, const std::string& key, int fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw ValidationError(key, fmt::format("mock parameter '{}' is not an integer", it->second));
  }
}

/// Number written just before `marker` in the prompt ("5 adet").
std::optional<int> number_before(std::string_view prompt, std::string_view marker) {
  const auto pos = prompt.find(marker);
  if (pos == std::string_view::npos || pos == 0) return std::nullopt;
  std::size_t end = pos;
  while (end > 0 && prompt[end - 1] == ' ') --end;
  std::size_t begin = end;
  while (begin > 0 && prompt[begin - 1] >= '0' && prompt[begin - 1] <= '9') --begin;
  if (begin == end) return std::nullopt;
  return std::stoi(std::string(prompt.substr(begin, end - begin)));
}

struct Word {
  std::string text;
  std::size_t begin;
  std::size_t end;
};

std::vector<Word> words_with_offsets(std::string_view s) {
  std::vector<Word> words;
  std::size_t i = 0;
  std::optional<std::size_t> start;
  std::string current;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    const std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 1;
    const auto cps = text::decode_utf8(s.substr(i, len));
    const char32_t cp = cps.empty() ? 0 : cps.front();
    if (text::is_alnum(cp)) {
      if (!start) start = i;
      current.append(s.substr(i, len));
    } else if (start) {
      words.push_back({std::move(current), *start, i});
      current.clear();
      start.reset();
    }
    i += len;
  }
  if (start) words.push_back({std::move(current), *start, s.size()});
  return words;
}

std::size_t codepoint_length(std::string_view s) { return text::decode_utf8(s).size(); }

std::vector<std::string> sentences(std::string_view passage) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < passage.size(); ++i) {
    const char c = passage[i];
    current.push_back(c == '\n' ? ' ' : c);
    const bool terminal = c == '.' || c == '!' || c == '?';
    const bool boundary = i + 1 == passage.size() || passage[i + 1] == ' ' || passage[i + 1] == '\n';
    if ((terminal && boundary) || c == '\n' || i + 1 == passage.size()) {
      const auto t = text::trim(current);
      if (text::count_word_tokens(t) >= 4) out.emplace_back(t);
      current.clear();
    }
  }
  if (out.empty() && !text::is_blank(passage)) out.emplace_back(text::trim(passage));
  return out;
}

constexpr std::array<std::string_view, 5> kFillers = {"Hiçbiri", "Tümü", "Bilinmiyor", "Belirsiz", "Diğer"};

}  // namespace

std::string_view passage_from_prompt(std::string_view prompt) {
  const auto open = prompt.find(prompting::kPassageOpen);
  if (open == std::string_view::npos) return prompt;
  const auto start = open + prompting::kPassageOpen.size();
  const auto close = prompt.find(prompting::kPassageClose, start);
  return text::trim(prompt.substr(start, close == std::string_view::npos ? std::string_view::npos : close - start));
}

std::string mock_quiz(std::string_view passage, int num_questions, int options_per_question, QuizKind format) {
  const auto sents = sentences(passage);
  std::vector<std::string> pool;
  std::set<std::string> pool_keys;
  for (const auto& w : words_with_offsets(passage)) {
    if (codepoint_length(w.text) < 5) continue;
    if (pool_keys.insert(text::turkish_lower(w.text)).second) pool.push_back(w.text);
  }

  Json arr = Json::array();
  for (int q = 0; q < num_questions; ++q) {
    const std::string& sentence = sents.empty() ? std::string("Metin") : sents[static_cast<std::size_t>(q) % sents.size()];
    const auto words = words_with_offsets(sentence);
    const Word* answer = nullptr;
    for (const auto& w : words) {
      if (!answer || codepoint_length(w.text) > codepoint_length(answer->text)) answer = &w;
    }
    std::string blanked = sentence;
    std::string answer_text = "metin";
    if (answer) {
      answer_text = answer->text;
      blanked = sentence.substr(0, answer->begin) + "______" + sentence.substr(answer->end);
    }
    Json item;
    if (format == QuizKind::Saq) {
      item["question"] = fmt::format("\"{}\" cümlesinde boş bırakılan yere hangi kelime gelmelidir?", blanked);
      item["answer"] = answer_text;
    } else {
      const std::string answer_key = text::turkish_lower(answer_text);
      std::vector<std::string> distractors;
      std::set<std::string> used = {answer_key};
      const std::size_t start = pool.empty() ? 0 : (static_cast<std::size_t>(q) * 7) % pool.size();
      for (std::size_t k = 0; k < pool.size() && static_cast<int>(distractors.size()) < options_per_question - 1; ++k) {
        const auto& cand = pool[(start + k) % pool.size()];
        if (used.insert(text::turkish_lower(cand)).second) distractors.push_back(cand);
      }
      for (auto filler : kFillers) {
        if (static_cast<int>(distractors.size()) >= options_per_question - 1) break;
        if (used.insert(text::turkish_lower(filler)).second) distractors.emplace_back(filler);
      }
      const int correct = q % options_per_question;
      Json opts = Json::object();
      std::size_t d = 0;
      for (int k = 0; k < options_per_question; ++k) {
        const std::string label(1, static_cast<char>('A' + k));
        opts[label] = k == correct ? answer_text : distractors[d++];
      }
      item["question"] = fmt::format(
          "\"{}\" cümlesinde boş bırakılan yere aşağıdakilerden hangisi gelmelidir?", blanked);
      item["options"] = std::move(opts);
      item["answer"] = std::string(1, static_cast<char>('A' + correct));
    }
    arr.push_back(std::move(item));
  }
  return arr.dump(2);
}

std::string chat_completion_body(std::string_view content, std::string_view model) {
  Json j;
  j["id"] = "mock-" + io::sha256_hex(content).substr(0, 16);
  j["object"] = "chat.completion";
  j["created"] = 0;
  j["model"] = model;
  j["choices"] = Json::array({{{"index", 0},
                               {"message", {{"role", "assistant"}, {"content", content}}},
                               {"finish_reason", "stop"}}});
  return j.dump();
}

MockEndpoint::MockEndpoint(const std::string& url) {
  constexpr std::string_view scheme = "mock://";
  std::string_view rest = url;
  if (rest.substr(0, scheme.size()) == scheme) rest.remove_prefix(scheme.size());
  const auto q = rest.find('?');
  mode_ = std::string(rest.substr(0, q));
  while (!mode_.empty() && mode_.back() == '/') mode_.pop_back();
  if (const auto slash = mode_.find('/'); slash != std::string::npos) mode_ = mode_.substr(0, slash);
  if (mode_.empty()) mode_ = "quiz";
  if (q != std::string_view::npos) {
    std::string_view query = rest.substr(q + 1);
    while (!query.empty()) {
      const auto amp = query.find('&');
      const auto pair = query.substr(0, amp);
      const auto eq = pair.find('=');
      params_[percent_decode(pair.substr(0, eq))] =
          eq == std::string_view::npos ? std::string{} : percent_decode(pair.substr(eq + 1));
      if (amp == std::string_view::npos) break;
      query.remove_prefix(amp + 1);
    }
  }
  static const std::set<std::string> modes = {"quiz", "reference", "fixed", "echo", "garbage", "status", "flaky"};
  if (!modes.count(mode_)) throw ValidationError("endpoint_url", fmt::format("unknown mock mode '{}'", mode_));
  if (mode_ == "reference") {
    auto it = params_.find("path");
    if (it == params_.end()) throw ValidationError("endpoint_url", "mock://reference needs ?path=<jsonl>");
    for (const auto& line : io::read_jsonl_lines(it->second)) {
      const Json j = Json::parse(line.text);
      references_.push_back({j.value("instruction", ""), j.value("input", ""), j.value("output", "")});
    }
  }
  if (mode_ == "status") int_param(params_, "code", 500);
}

HttpResponse MockEndpoint::post_json(const std::string&, const std::string& body, const Headers&,
                                     std::chrono::milliseconds) {
  return respond(body);
}

std::string MockEndpoint::quiz_for(std::string_view prompt) const {
  const bool saq = params_.count("format") ? params_.at("format") == "saq"
                                           : prompt.find("kısa cevaplı") != std::string_view::npos;
  const int n = int_param(params_, "n", number_before(prompt, " adet").value_or(5));
  const int options = int_param(params_, "options", number_before(prompt, " seçenekli").value_or(5));
  return mock_quiz(passage_from_prompt(prompt), n, options, saq ? QuizKind::Saq : QuizKind::Mcq);
}

HttpResponse MockEndpoint::respond(std::string_view request_body) {
  Json req;
  try {
    req = Json::parse(request_body.begin(), request_body.end());
  } catch (const Json::parse_error&) {
    return {400, R"({"error":{"message":"request body is not JSON"}})"};
  }
  std::string prompt;
  const std::string model = req.value("model", "mock");
  if (req.contains("messages") && req["messages"].is_array()) {
    for (const auto& m : req["messages"]) {
      if (m.value("role", "") == "user" && m.contains("content") && m["content"].is_string()) {
        prompt = m["content"].get<std::string>();
      }
    }
  }
  if (prompt.empty()) return {400, R"({"error":{"message":"no user message"}})"};

  if (mode_ == "status") return {int_param(params_, "code", 500), R"({"error":{"message":"mock status"}})"};
  if (mode_ == "flaky") {
    int seen = 0;
    {
      std::lock_guard lock(mu_);
      seen = seen_[prompt]++;
    }
    if (seen < int_param(params_, "fail", 1)) return {503, R"({"error":{"message":"mock overload"}})"};
    return {200, chat_completion_body(quiz_for(prompt), model)};
  }
  if (mode_ == "fixed") return {200, chat_completion_body(params_["text"], model)};
  if (mode_ == "echo") return {200, chat_completion_body(prompt, model)};
  if (mode_ == "garbage") return {200, chat_completion_body("Üzgünüm, bu metinden soru üretemiyorum.", model)};
  if (mode_ == "reference") {
    for (const auto& ref : references_) {
      if (ref.input.empty() || prompt.find(ref.input) == std::string::npos) continue;
      if (prompt.find(ref.instruction) == std::string::npos) continue;
      return {200, chat_completion_body(ref.output, model)};
    }
    return {404, R"({"error":{"message":"no reference record matches the prompt"}})"};
  }
  return {200, chat_completion_body(quiz_for(prompt), model)};
}

}  // namespace quizforge::generation
