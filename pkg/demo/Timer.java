package demo.time;

public class Timer {
    private long startTime;
    private long elapsedTime;

    // starts the timer and records the start time
    public void start() {
        startTime = System.nanoTime();
    }

    /**
     * Stops the timer and adds the elapsed time since start.
     */
    public void stop() {
        elapsedTime += System.nanoTime() - startTime;
    }

    /** Returns the elapsed time in milliseconds. */
    public long getElapsedMillis() {
        return elapsedTime / 1_000_000L;
    }
}
