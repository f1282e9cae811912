#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "gpslab/core/model.hpp"
#include "gpslab/core/time.hpp"

namespace gpslab::sms {

enum class Delivery { Delivered, NotDelivered };

struct LogEntry {
    std::uint64_t seq = 0;
    SimTimestamp ts;
    SmsMessage msg;
    Delivery delivery = Delivery::NotDelivered;
};

// In-process stand-in for the cellular network. The sender's number is
// carried verbatim; nothing is authenticated.
//
// Every message is logged before delivery. Deliveries happen in log order
// on whichever thread is draining the queue, without the bus lock held, so
// a subscriber may send further messages from inside its callback; those
// are delivered after it returns. With a single thread, send() returns
// only after the message and everything it triggered have been delivered.
class SmsBus {
public:
    using Subscriber = std::function<void(const SmsMessage&)>;

    explicit SmsBus(const Clock* clock = nullptr) : clock_(clock) {}

    SmsBus(const SmsBus&) = delete;
    SmsBus& operator=(const SmsBus&) = delete;

    void subscribe(const std::string& phone, Subscriber subscriber);
    void unsubscribe(const std::string& phone);
    bool is_registered(const std::string& phone) const;

    // Throws Errc::Range for an over-long body.
    Delivery send(const SmsMessage& msg);

    std::vector<LogEntry> log() const;

    // Blocks until no delivery is queued or running. Must not be called
    // from a subscriber.
    void wait_idle();

private:
    void drain(std::unique_lock<std::mutex>& lock);

    const Clock* clock_;
    mutable std::mutex mu_;
    std::condition_variable idle_;
    std::map<std::string, Subscriber> subscribers_;
    std::vector<LogEntry> log_;
    std::deque<SmsMessage> pending_;
    bool draining_ = false;
};

}  // namespace gpslab::sms
