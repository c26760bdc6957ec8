#include "trajformer/data/trajectory_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace trajformer::data {

const char* category_name(Category c) {
  switch (c) {
    case Category::SmallVehicle: return "small_vehicle";
    case Category::BigVehicle: return "big_vehicle";
    case Category::Pedestrian: return "pedestrian";
    case Category::Cyclist: return "cyclist";
    case Category::Other: return "other";
  }
  return "other";
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

template <typename T>
bool parse_token(std::string_view token, T& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

ParsedLog parse_trajectory_stream(std::istream& in) {
  std::map<long, std::vector<AgentState>> by_frame;
  ParsedLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::array<std::string, 10> tokens;
    std::size_t count = 0;
    std::string token;
    while (fields >> token) {
      if (count < tokens.size()) tokens[count] = token;
      ++count;
    }
    if (count == 0) continue;
    if (count != tokens.size()) {
      throw ParseError(line_no, "expected 10 fields, found " + std::to_string(count));
    }
    long frame_id = 0;
    long object_id = 0;
    long object_type = 0;
    std::array<double, 7> numbers{};
    bool ok = parse_token(tokens[0], frame_id) && parse_token(tokens[1], object_id);
    // object_type is sometimes written as a float in exported logs.
    double type_value = 0.0;
    ok = ok && parse_token(tokens[2], type_value);
    for (std::size_t i = 0; ok && i < numbers.size(); ++i) ok = parse_token(tokens[3 + i], numbers[i]);
    if (!ok) throw ParseError(line_no, "malformed numeric field in '" + line + "'");
    object_type = static_cast<long>(type_value);

    AgentState s;
    s.agent_id = object_id;
    s.x = numbers[0];
    s.y = numbers[1];
    s.length = numbers[3];
    s.width = numbers[4];
    s.heading = numbers[6];
    if (object_type >= 1 && object_type <= kCategoryCount && type_value == object_type) {
      s.category = static_cast<Category>(object_type);
    } else {
      s.category = Category::Other;
      ++log.unknown_type_count;
    }
    by_frame[frame_id].push_back(s);
    ++log.observation_count;
  }
  log.frames.reserve(by_frame.size());
  for (auto& [id, agents] : by_frame) log.frames.push_back({id, std::move(agents)});
  return log;
}

ParsedLog parse_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file " + path.string());
  return parse_trajectory_stream(in);
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

void write_trajectory_stream(std::ostream& out, std::span<const FrameRecords> frames) {
  for (const auto& frame : frames) {
    for (const auto& a : frame.agents) {
      out << frame.frame_id << ' ' << a.agent_id << ' ' << static_cast<int>(a.category) << ' '
          << format_double(a.x) << ' ' << format_double(a.y) << " 0 " << format_double(a.length)
          << ' ' << format_double(a.width) << " 0 " << format_double(a.heading) << '\n';
    }
  }
}

}  // namespace trajformer::data
