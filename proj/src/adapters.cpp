#include "maskedit/adapters.hpp"

#include <map>

namespace maskedit {

AdapterRegistry& AdapterRegistry::instance() {
    static AdapterRegistry reg;
    return reg;
}

void AdapterRegistry::register_generator(const std::string& name, GeneratorFactory f) {
    generators_[name] = std::move(f);
}
void AdapterRegistry::register_classifier(const std::string& name, ClassifierFactory f) {
    classifiers_[name] = std::move(f);
}
void AdapterRegistry::register_parser(const std::string& name, ParserFactory f) {
    parsers_[name] = std::move(f);
}
void AdapterRegistry::register_features(const std::string& name, FeaturesFactory f) {
    features_[name] = std::move(f);
}

namespace {
template <typename Map>
const typename Map::mapped_type& lookup(const Map& m, const std::string& name, const char* kind) {
    auto it = m.find(name);
    if (it == m.end())
        throw std::invalid_argument(std::string("no ") + kind + " adapter registered under name '" +
                                    name + "'");
    return it->second;
}
}  // namespace

std::shared_ptr<const Generator> AdapterRegistry::make_generator(const std::string& name,
                                                                 const std::string& cfg) const {
    return lookup(generators_, name, "generator")(cfg);
}
std::shared_ptr<const Classifier> AdapterRegistry::make_classifier(const std::string& name,
                                                                   const std::string& cfg) const {
    return lookup(classifiers_, name, "classifier")(cfg);
}
std::shared_ptr<const FaceParser> AdapterRegistry::make_parser(const std::string& name,
                                                               const std::string& cfg) const {
    return lookup(parsers_, name, "parser")(cfg);
}
std::shared_ptr<const FeatureExtractor> AdapterRegistry::make_features(const std::string& name,
                                                                       const std::string& cfg) const {
    return lookup(features_, name, "feature extractor")(cfg);
}

}  // namespace maskedit
