package demo.events;

import java.util.ArrayList;
import java.util.List;

public class EventBus {
    private final List<EventListener> listeners = new ArrayList<>();

    /**
     * Registers the event listener so it receives every published event.
     */
    public void registerListener(EventListener listener) {
        listeners.add(listener);
    }

    // publish the event to every registered listener
    public void publishEvent(Event event) {
        for (EventListener listener : listeners) {
            listener.onEvent(event);
        }
    }

    /** TODO: ok */
    public void clear() {
        listeners.clear();
    }
}
