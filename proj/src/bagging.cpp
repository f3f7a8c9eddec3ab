#include "llpdew/bagging.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "llpdew/rng.hpp"

namespace llpdew {
namespace {

// Splits a comma-separated list of non-negative integers.  Used for both
// index and count columns of a bag record.
std::vector<long long> parse_int_list(const std::string& field,
                                      std::size_t line_number,
                                      const std::string& origin,
                                      const char* what) {
  std::vector<long long> out;
  std::size_t pos = 0;
  while (pos <= field.size()) {
    std::size_t comma = field.find(',', pos);
    if (comma == std::string::npos) comma = field.size();
    const char* first = field.data() + pos;
    const char* last = field.data() + comma;
    long long value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last) {
      std::ostringstream msg;
      msg << origin << ":" << line_number << ": bad " << what << " '"
          << std::string(first, last) << "'";
      throw std::runtime_error(msg.str());
    }
    out.push_back(value);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

BagCollection generate_bags(const Dataset& dataset, int bag_size,
                            std::uint64_t seed) {
  check_dataset(dataset);
  if (bag_size <= 0) throw std::invalid_argument("bag_size must be positive");
  const std::size_t n = dataset.size();
  const std::size_t m = static_cast<std::size_t>(bag_size);
  if (m > n) throw std::invalid_argument("bag_size exceeds dataset size");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngEngine rng = make_stream(seed, RngStream::bag_gen);
  std::shuffle(order.begin(), order.end(), rng);

  BagCollection collection;
  collection.source_dataset_id =
      dataset.split_tag == SplitTag::train ? "train" : "test";
  const std::size_t bag_count = n / m;
  collection.bags.reserve(bag_count);
  for (std::size_t b = 0; b < bag_count; ++b) {
    std::vector<std::size_t> indices(order.begin() + b * m,
                                     order.begin() + (b + 1) * m);
    std::vector<int> counts(static_cast<std::size_t>(dataset.class_count), 0);
    for (std::size_t idx : indices) {
      counts[static_cast<std::size_t>(dataset.labels[idx])]++;
    }
    collection.bags.push_back(make_bag(std::move(indices), std::move(counts)));
  }
  ValidationReport report = validate_collection(collection, dataset);
  if (!report.ok()) {
    throw std::logic_error("generated bags failed validation:\n" +
                           report.to_string());
  }
  return collection;
}

std::string format_bag_record(const BagFileRecord& record) {
  std::ostringstream out;
  out << record.bag_id << '\t';
  for (std::size_t i = 0; i < record.instance_indices.size(); ++i) {
    if (i) out << ',';
    out << record.instance_indices[i];
  }
  out << '\t';
  for (std::size_t c = 0; c < record.counts.size(); ++c) {
    if (c) out << ',';
    out << record.counts[c];
  }
  return out.str();
}

BagFileRecord parse_bag_record(const std::string& line, std::size_t line_number,
                               const std::string& origin) {
  std::size_t tab1 = line.find('\t');
  std::size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                               : line.find('\t', tab1 + 1);
  if (tab1 == std::string::npos || tab2 == std::string::npos ||
      line.find('\t', tab2 + 1) != std::string::npos) {
    std::ostringstream msg;
    msg << origin << ":" << line_number
        << ": expected 3 tab-separated fields";
    throw std::runtime_error(msg.str());
  }
  BagFileRecord record;
  {
    const std::string field = line.substr(0, tab1);
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, record.bag_id);
    if (ec != std::errc{} || ptr != last || first == last) {
      std::ostringstream msg;
      msg << origin << ":" << line_number << ": bad bag_id '" << field << "'";
      throw std::runtime_error(msg.str());
    }
  }
  for (long long v :
       parse_int_list(line.substr(tab1 + 1, tab2 - tab1 - 1), line_number,
                      origin, "instance index")) {
    if (v < 0) {
      std::ostringstream msg;
      msg << origin << ":" << line_number << ": negative instance index " << v;
      throw std::runtime_error(msg.str());
    }
    record.instance_indices.push_back(static_cast<std::size_t>(v));
  }
  for (long long v : parse_int_list(line.substr(tab2 + 1), line_number, origin,
                                    "count")) {
    if (v < 0) {
      std::ostringstream msg;
      msg << origin << ":" << line_number << ": negative count " << v;
      throw std::runtime_error(msg.str());
    }
    record.counts.push_back(static_cast<int>(v));
  }
  return record;
}

void write_bags(const BagCollection& collection, const std::string& path) {
  if (collection.bags.empty()) {
    throw std::invalid_argument("refusing to write empty bag collection");
  }
  const std::size_t class_count = collection.bags.front().counts.size();
  const std::size_t bag_size = collection.bags.front().size();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "#llp-bags v1 C=" << class_count << " M=" << bag_size << "\n";
  for (std::size_t b = 0; b < collection.bags.size(); ++b) {
    const Bag& bag = collection.bags[b];
    BagFileRecord record;
    record.bag_id = static_cast<long long>(b);
    record.instance_indices = bag.instance_indices;
    record.counts = bag.counts;
    out << format_bag_record(record) << "\n";
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

BagCollection read_bags(const std::string& path, const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error(path + ":1: missing header");
  }
  std::size_t class_count = 0;
  std::size_t bag_size = 0;
  {
    std::istringstream hs(header);
    std::string magic, version, c_field, m_field;
    hs >> magic >> version >> c_field >> m_field;
    bool ok = magic == "#llp-bags" && version == "v1" &&
              c_field.rfind("C=", 0) == 0 && m_field.rfind("M=", 0) == 0;
    if (ok) {
      try {
        class_count = std::stoul(c_field.substr(2));
        bag_size = std::stoul(m_field.substr(2));
      } catch (const std::exception&) {
        ok = false;
      }
    }
    std::string rest;
    if (hs >> rest) ok = false;
    if (!ok || class_count == 0 || bag_size == 0) {
      throw std::runtime_error(path + ":1: bad header '" + header + "'");
    }
  }
  if (class_count != static_cast<std::size_t>(dataset.class_count)) {
    std::ostringstream msg;
    msg << path << ": header C=" << class_count << " but dataset has "
        << dataset.class_count << " classes";
    throw std::runtime_error(msg.str());
  }

  BagCollection collection;
  collection.source_dataset_id =
      dataset.split_tag == SplitTag::train ? "train" : "test";
  std::vector<char> seen(dataset.size(), 0);
  std::string line;
  std::size_t line_number = 1;
  long long expected_id = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    BagFileRecord record = parse_bag_record(line, line_number, path);
    if (record.bag_id != expected_id) {
      std::ostringstream msg;
      msg << path << ":" << line_number << ": bag_id " << record.bag_id
          << " out of sequence (expected " << expected_id << ")";
      throw std::runtime_error(msg.str());
    }
    ++expected_id;
    if (record.instance_indices.size() != bag_size) {
      std::ostringstream msg;
      msg << path << ":" << line_number << ": bag has "
          << record.instance_indices.size() << " indices, header says M="
          << bag_size;
      throw std::runtime_error(msg.str());
    }
    if (record.counts.size() != class_count) {
      std::ostringstream msg;
      msg << path << ":" << line_number << ": bag has " << record.counts.size()
          << " counts, header says C=" << class_count;
      throw std::runtime_error(msg.str());
    }
    long long count_sum = 0;
    for (int c : record.counts) count_sum += c;
    if (count_sum != static_cast<long long>(bag_size)) {
      std::ostringstream msg;
      msg << path << ":" << line_number << ": counts sum to " << count_sum
          << ", expected " << bag_size;
      throw std::runtime_error(msg.str());
    }
    for (std::size_t idx : record.instance_indices) {
      if (idx >= dataset.size()) {
        std::ostringstream msg;
        msg << path << ":" << line_number << ": instance index " << idx
            << " out of range for dataset of size " << dataset.size();
        throw std::runtime_error(msg.str());
      }
      if (seen[idx]) {
        std::ostringstream msg;
        msg << path << ":" << line_number << ": instance index " << idx
            << " appears in more than one bag";
        throw std::runtime_error(msg.str());
      }
      seen[idx] = 1;
    }
    collection.bags.push_back(
        make_bag(std::move(record.instance_indices), std::move(record.counts)));
  }
  if (collection.bags.empty()) {
    throw std::runtime_error(path + ": no bag records");
  }
  return collection;
}

}  // namespace llpdew
